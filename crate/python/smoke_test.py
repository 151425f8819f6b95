"""Smoke test for the `qhet` extension module.

Build and install first (from the repository root):

    pip install maturin
    pip install --no-build-isolation -e crates/py

then run `python python/smoke_test.py`. Exits non-zero on the first failure.
"""

import json
import math
import os
import sys
import tempfile

import qhet


def close(a, b, rel=1e-12, abs_=0.0):
    return abs(a - b) <= max(abs_, rel * max(abs(a), abs(b)))


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name}" + (f"  ({detail})" if detail else ""))
    if not ok:
        sys.exit(1)


def main():
    sc = qhet.Scenario()
    check("default scenario", sc.r == 1.0 and sc.q == 1.0 and sc.derived()["omega_beat"] == 1.0, repr(sc))
    check("round trip through text", qhet.Scenario.from_text(sc.serialize()).digest() == sc.digest())

    # Noiseless high-gain amplifier: no SNR penalty.
    for r in (0.5, 1.0, 2.5, 5.0):
        nf = qhet.noise_figure(sc.with_value("r", r)).nf_db
        check(f"NF = 0 dB at r = {r}", abs(nf) < 1e-12, f"{nf:.2e}")

    for xi in (0.25, 0.5, 1.0):
        want = 10 * math.log10(1 / xi)
        check(f"regular detector xi = {xi}", close(qhet.noise_figure_regular(xi), want, abs_=1e-12))
        got = qhet.noise_figure(qhet.Scenario(r=0, q=xi)).nf_db
        check(f"finite-gain form at r = 0, q = {xi}", close(got, want, abs_=1e-12))

    f_ex = qhet.Scenario.from_text(
        "omega_s = 100.5\nomega_l = 100\nalpha_s_mag = 1\nepsilon_l = 1\ntheta_l = 0\n"
        f"r = {math.asinh(1.0)!r}\nq = 1\n"
    )
    f_hand = 200 + 2 * math.sqrt(2) * math.sqrt(9900)
    check("F(10) at sinh r = 1", close(qhet.spectral_factor_f(10.0, f_ex), f_hand, rel=1e-9))
    eta = 1 / 100.5
    check("chi(10) at sinh r = 1", close(qhet.noise_psd(10.0, f_ex), 2 * eta * (1 + eta * f_hand), rel=1e-9))
    try:
        qhet.spectral_factor_f(200.0, f_ex)
        check("|omega| > omega_l rejected", False)
    except qhet.DomainError as e:
        check("|omega| > omega_l rejected", True, str(e))
    try:
        qhet.Scenario(q=1.5)
        check("q > 1 rejected", False)
    except qhet.ConfigError as e:
        check("q > 1 rejected", True, str(e))

    oracle = qhet.oracle_noise_figure(sc.with_value("q", 0.5))
    analytic = qhet.noise_figure(sc.with_value("q", 0.5))
    check("oracle matches closed form", close(oracle.nf_db, analytic.nf_db, abs_=1e-9),
          f"{oracle.nf_db:.12f} vs {analytic.nf_db:.12f}")
    obs = qhet.oracle_observables(sc)
    check("oracle observables", close(obs["p_out"], qhet.output_power(sc), rel=1e-9))

    ts = qhet.synthesize_photocurrent(sc, seed=7, duration=2**20 / 16 * 2 * math.pi)
    again = qhet.synthesize_photocurrent(sc, seed=7, duration=2**20 / 16 * 2 * math.pi)
    check("synthesis is deterministic", ts.samples == again.samples, f"{len(ts)} samples")
    m = qhet.measure_nf(ts, sc)
    check("Monte-Carlo NF near 0 dB", abs(m.nf_db) < 4 * m.std_err_db + 0.05, f"{m.nf_db:.4f} ± {m.std_err_db:.4f} dB")
    psd = qhet.welch_psd(ts)
    check("Welch estimate", psd.n_segments >= 200 and len(psd.freqs) == len(psd.values))

    with tempfile.TemporaryDirectory() as d:
        ts.write_binary(os.path.join(d, "record.f64"))
        back = qhet.TimeSeries.read_binary(os.path.join(d, "record.f64"))
        check("binary record round trip", back.samples == ts.samples and back.seed == 7)

    report = json.loads(qhet.run_sweep("parameter = gain_db\nvalues = 0, 10, 20\noutputs = nf_db\nset.q = 0.5\n",
                                       format="json"))
    nfs = [rec["result"] for rec in report["records"]]
    check("sweep NF falls with gain", nfs[0] > nfs[1] > nfs[2], str([round(v, 4) for v in nfs]))

    passed, table = qhet.run_validation("quick")
    check("quick validation", passed, "\n" + table if not passed else "")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
