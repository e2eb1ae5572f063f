import numpy as np
import pandas as pd
import pytest

from lsquant.errors import InputDataError
from lsquant.panels import align_panels, from_long, to_long, validate_panel


def small_panel():
    idx = pd.bdate_range("2022-03-01", periods=4)
    return pd.DataFrame(
        [[1.0, np.nan], [2.0, 5.0], [3.0, 6.0], [4.0, 7.0]],
        index=idx,
        columns=["AAA", "BBB"],
    )


def test_validate_accepts_well_formed():
    p = small_panel()
    assert validate_panel(p) is p


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda p: p.reset_index(drop=True), "DatetimeIndex"),
        (lambda p: p.iloc[[1, 0, 2, 3]], "increasing"),
        (lambda p: p.iloc[[0, 0, 1, 2]], "increasing"),
        (lambda p: p.rename(columns={"BBB": "AAA"}), "duplicate"),
    ],
)
def test_validate_rejects_malformed(mutate, message):
    with pytest.raises(InputDataError, match=message):
        validate_panel(mutate(small_panel()))


def test_long_round_trip_drops_and_restores():
    p = small_panel()
    rows = to_long(p)
    # the missing cell is simply absent in long form
    assert len(rows) == 7
    back = from_long(rows).reindex(index=p.index, columns=p.columns)
    pd.testing.assert_frame_equal(back, p, check_freq=False, check_names=False)


def test_align_panels_unions_axes():
    a = small_panel()
    b = small_panel().iloc[1:].rename(columns={"BBB": "CCC"})
    out = align_panels({"x": a, "y": b})
    assert list(out["x"].columns) == ["AAA", "BBB", "CCC"]
    assert out["y"].index.equals(a.index)
    assert np.isnan(out["y"].loc[a.index[0], "AAA"])
    assert out["x"]["CCC"].isna().all()
