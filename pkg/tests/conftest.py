import pytest

from srocmeta.tables import ContingencyTable, ReaderRecord, StudyDataset


@pytest.fixture
def six_reader_dataset() -> StudyDataset:
    """Hand-made two-group study; r6 has a zero cell, case counts vary."""
    rows = [
        ("r1", "expert", 45, 5, 15, 35),
        ("r2", "expert", 40, 10, 20, 30),
        ("r3", "expert", 50, 2, 10, 38),
        ("r4", "novice", 30, 8, 30, 32),
        ("r5", "novice", 56, 32, 40, 32),
        ("r6", "novice", 24, 0, 6, 20),
    ]
    records = tuple(
        ReaderRecord(reader_id=rid, group=grp,
                     table=ContingencyTable(tp=tp, fp=fp, fn=fn, tn=tn))
        for rid, grp, tp, fp, fn, tn in rows
    )
    return StudyDataset(records=records, label="fixture-study")


@pytest.fixture
def fixture_csv_text() -> str:
    return (
        "reader_id,group,tp,fp,fn,tn\n"
        "r1,expert,45,5,15,35\n"
        "r2,expert,40,10,20,30\n"
        "r3,expert,50,2,10,38\n"
        "r4,novice,30,8,30,32\n"
        "r5,novice,56,32,40,32\n"
        "r6,novice,24,0,6,20\n"
    )
