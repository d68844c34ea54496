"""Smoke test for the cyccover_py extension module."""

import cyccover_py as cc


def main():
    v = cc.CycVec("011000")
    assert v.n == 6 and v.q == 2
    assert str(v.shift(1)) == "001100"
    assert cc.works(cc.CycVec("101000"))
    assert not cc.works(cc.CycVec("100000"))

    report = cc.works_together([cc.CycVec("11000"), cc.CycVec("00101")])
    assert report["covers"] and report["witness"] is None

    r = cc.h_exact(2, 9)
    assert r["value"] == 3 and r["complete"]
    assert cc.works_together([cc.CycVec(s) for s in r["witness"]["rows"]])["covers"]

    rows = cc.table(12, escalate=True)
    assert [row["lower"] for row in rows] == [0, 0, 1, 0, 2, 2, 2, 0, 3, 2, 2, 3]

    rep = cc.verify_conjecture(7)
    assert len(rep["exceptions"]) == 12

    assert cc.find_bad_subgraph(cc.CycVec("0110000")) is None
    assert cc.find_bad_subgraph(cc.CycVec("0100000")) is not None
    assert cc.girth(7, [1, 2]) == 4

    v3 = cc.CycVec("12000", q=3)
    x = cc.failure_certificate(v3, 5)
    assert all(v3.dot(x.shift(k)) != 0 for k in range(5))

    try:
        cc.CycVec("012", q=2)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
    print("smoke test ok")


if __name__ == "__main__":
    main()
