import os

import numpy as np
import pytest

from cycap.core.fixtures import figure3_tour
from cycap.core.instance import (
    build_instance,
    euc2d_cost,
    figure3_instance,
    load_instance,
    parse_matrix_csv,
    parse_tsplib,
    to_matrix_csv,
)
from cycap.core.tour import tour_cost
from cycap.errors import InstanceFormatError

FULL_MATRIX_3 = """NAME: tiny
TYPE: ATSP
DIMENSION: 3
EDGE_WEIGHT_TYPE: EXPLICIT
EDGE_WEIGHT_FORMAT: FULL_MATRIX
EDGE_WEIGHT_SECTION
0 5 9
4 0 7
3 8 0
EOF
"""

EUC_4 = """NAME: square
TYPE: TSP
DIMENSION: 4
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 0
3 3 4
4 0 4
EOF
"""


def test_full_matrix_transcription():
    inst = parse_tsplib(FULL_MATRIX_3)
    assert inst.name == "tiny"
    assert inst.n == 3
    assert inst.c(0, 1) == 5
    assert inst.c(1, 0) == 4
    assert inst.c(2, 1) == 8
    assert not inst.symmetric
    assert all(inst.c(i, i) == inst.penalty for i in range(3))
    assert inst.penalty > 3 * 9


def test_full_matrix_length_mismatch():
    text = FULL_MATRIX_3.replace("3 8 0", "3 8")
    with pytest.raises(InstanceFormatError, match="matrix length mismatch"):
        parse_tsplib(text)


def test_missing_dimension():
    text = "\n".join(line for line in FULL_MATRIX_3.splitlines() if not line.startswith("DIMENSION"))
    with pytest.raises(InstanceFormatError, match="DIMENSION"):
        parse_tsplib(text)


def test_unsupported_weight_format():
    text = FULL_MATRIX_3.replace("FULL_MATRIX", "UPPER_ROW")
    with pytest.raises(InstanceFormatError, match="EDGE_WEIGHT_FORMAT"):
        parse_tsplib(text)


def test_non_numeric_token_reports_line():
    text = FULL_MATRIX_3.replace("4 0 7", "4 x 7")
    with pytest.raises(InstanceFormatError) as excinfo:
        parse_tsplib(text)
    assert excinfo.value.line == 8


@pytest.mark.parametrize("p, q, expected", [
    ((0, 0), (3, 4), 5),
    ((0, 0), (1, 1), 1),
    ((0, 0), (0.5, 0), 1),
])
def test_euc2d_cost(p, q, expected):
    assert euc2d_cost(p, q) == expected


def test_euc2d_instance_is_symmetric():
    inst = parse_tsplib(EUC_4)
    assert inst.symmetric
    assert inst.c(0, 2) == 5
    assert inst.c(0, 1) == 3
    assert inst.c(1, 2) == 4


def test_csv_too_small():
    with pytest.raises(InstanceFormatError, match="n must be ≥ 3"):
        parse_matrix_csv("0,2\n2,0")


def test_csv_symmetry_flag():
    assert parse_matrix_csv("0,1,2\n1,0,3\n2,3,0").symmetric
    assert not parse_matrix_csv("0,1,2\n4,0,3\n2,3,0").symmetric


def test_csv_ragged_row():
    with pytest.raises(InstanceFormatError, match="ragged"):
        parse_matrix_csv("0,1,2\n1,0\n2,3,0")


def test_negative_costs_rejected():
    with pytest.raises(InstanceFormatError, match="negative"):
        build_instance("neg", [[0, -1, 2], [1, 0, 3], [2, 3, 0]])


def test_csv_export_reparses_to_same_costs():
    inst = parse_tsplib(FULL_MATRIX_3)
    again = parse_matrix_csv(to_matrix_csv(inst))
    assert np.array_equal(inst.cost, again.cost)


def test_figure3_costs():
    inst = figure3_instance()
    assert inst.n == 10
    assert inst.symmetric
    assert inst.c(0, 5) == 7
    assert inst.c(0, 2) == 1000
    assert tour_cost(inst, figure3_tour()) == 70


def test_load_fixture_and_files(tmp_path):
    assert load_instance("fig3").name == "fig3"

    path = tmp_path / "tiny.atsp"
    path.write_text(FULL_MATRIX_3, encoding="utf-8")
    assert load_instance(str(path)).c(0, 2) == 9

    csv_path = tmp_path / "m.csv"
    csv_path.write_text("0,1,2\n1,0,3\n2,3,0\n", encoding="utf-8")
    inst = load_instance(str(csv_path))
    assert inst.name == "m"
    assert inst.n == 3


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="file not found"):
        load_instance(str(tmp_path / "missing.tsp"))


@pytest.mark.skipif(not os.getenv("CYCAP_TSPLIB_DIR"), reason="CYCAP_TSPLIB_DIR not set")
def test_ftv33_header():
    path = os.path.join(os.environ["CYCAP_TSPLIB_DIR"], "ftv33.atsp")
    if not os.path.exists(path):
        pytest.skip("ftv33.atsp not available")
    inst = load_instance(path)
    assert inst.n == 34
    assert not inst.symmetric
