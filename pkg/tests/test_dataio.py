import pytest

from srocmeta.dataio import (
    parse_dataset,
    parse_dataset_text,
    parse_sim_config_text,
    serialize_dataset,
)
from srocmeta.errors import DatasetFormatError
from srocmeta.simulate import SimConfig, generate


def test_parse_valid_file(tmp_path, fixture_csv_text):
    path = tmp_path / "readers.csv"
    path.write_text(fixture_csv_text, encoding="utf-8")
    ds = parse_dataset(str(path), label="t")
    assert ds.n_readers == 6
    assert ds.records[0].reader_id == "r1"
    assert ds.records[0].group == "expert"
    assert ds.records[0].table.tp == 45


def test_parse_plain_header():
    ds = parse_dataset_text("reader_id,tp,fp,fn,tn\nx,10,2,5,13\n")
    assert ds.n_readers == 1
    assert ds.records[0].group is None


def test_parse_crlf_accepted():
    ds = parse_dataset_text("reader_id,tp,fp,fn,tn\r\nx,10,2,5,13\r\ny,8,1,7,14\r\n")
    assert ds.n_readers == 2


def test_parse_reports_line_and_field():
    text = "reader_id,tp,fp,fn,tn\na,10,2,5,13\nb,-1,2,5,13\n"
    with pytest.raises(DatasetFormatError) as err:
        parse_dataset_text(text)
    assert "line 3" in str(err.value)
    assert "tp" in str(err.value)

    with pytest.raises(DatasetFormatError, match="integer"):
        parse_dataset_text("reader_id,tp,fp,fn,tn\na,10.5,2,5,13\n")


def test_parse_duplicate_reader():
    text = "reader_id,tp,fp,fn,tn\nr1,10,2,5,13\nr1,8,1,7,14\n"
    with pytest.raises(DatasetFormatError, match="duplicate"):
        parse_dataset_text(text)


def test_parse_malformed_header():
    with pytest.raises(DatasetFormatError, match="header"):
        parse_dataset_text("id,tp,fp,fn,tn\nа,1,1,1,1\n")
    with pytest.raises(DatasetFormatError, match="header"):
        parse_dataset_text("")


def test_parse_empty_arms_rejected():
    with pytest.raises(DatasetFormatError, match="diseased"):
        parse_dataset_text("reader_id,tp,fp,fn,tn\na,0,2,0,13\n")
    with pytest.raises(DatasetFormatError, match="healthy"):
        parse_dataset_text("reader_id,tp,fp,fn,tn\na,2,0,3,0\n")


def test_parse_named_group_column():
    text = "reader_id,experience,tp,fp,fn,tn\na,senior,10,2,5,13\n"
    ds = parse_dataset_text(text, group_column="experience")
    assert ds.records[0].group == "senior"
    with pytest.raises(DatasetFormatError, match="header"):
        parse_dataset_text(text, group_column="cohort")
    with pytest.raises(DatasetFormatError, match="header"):
        parse_dataset_text(text)  # unnamed extra column is rejected


def test_parse_missing_file():
    with pytest.raises(OSError):
        parse_dataset("/nonexistent/readers.csv")


def test_roundtrip_identity(fixture_csv_text):
    ds = parse_dataset_text(fixture_csv_text, label="round")
    again = parse_dataset_text(serialize_dataset(ds), label="round")
    assert again == ds
    # and for the plain (ungrouped) variant
    plain = parse_dataset_text("reader_id,tp,fp,fn,tn\nx,10,2,5,13\n", label="p")
    assert parse_dataset_text(serialize_dataset(plain), label="p") == plain


def test_roundtrip_simulated_dataset():
    ds = generate(SimConfig(n_readers=6, n_diseased=70, n_healthy=90,
                            theta_true=0.3, tau=0.2, fpr_logit_sd=0.4, seed=21))
    parsed = parse_dataset_text(serialize_dataset(ds), label=ds.label)
    assert parsed == ds


def test_serialize_rejects_corrected_tables(six_reader_dataset):
    with pytest.raises(ValueError, match="non-integer"):
        serialize_dataset(six_reader_dataset.corrected("all"))


def test_sim_config_parsing():
    text = """
    # synthetic study
    n_readers = 12
    n_diseased = 80
    n_healthy=160
    theta_true = 0.2   # accuracy parameter
    tau = 0.15
    seed = 9
    """
    cfg = parse_sim_config_text(text)
    assert cfg == SimConfig(n_readers=12, n_diseased=80, n_healthy=160,
                            theta_true=0.2, tau=0.15, seed=9)


def test_sim_config_overrides_win():
    cfg = parse_sim_config_text("n_readers=5\nn_diseased=50\nn_healthy=50\ntheta_true=0.4\n",
                                overrides={"n_readers": 9, "tau": None})
    assert cfg.n_readers == 9
    assert cfg.tau == 0.0


def test_sim_config_errors():
    with pytest.raises(DatasetFormatError, match="unknown"):
        parse_sim_config_text("bananas=3\n")
    with pytest.raises(DatasetFormatError, match="bad value"):
        parse_sim_config_text("n_readers=few\n")
    with pytest.raises(DatasetFormatError, match="key=value"):
        parse_sim_config_text("just words\n")
    with pytest.raises(DatasetFormatError, match="invalid simulation config"):
        parse_sim_config_text("n_readers=0\n")
