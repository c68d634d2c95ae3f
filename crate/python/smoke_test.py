#!/usr/bin/env python3
"""Smoke test for the convmix Python extension.

Builds the extension with cargo if needed, imports it, and exercises the
main types end to end: synthetic pool -> simulation -> annotation ->
metrics -> parameter estimation -> rendering.

Run from anywhere:  python3 python/smoke_test.py
"""
import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_extension() -> Path:
    """Builds the cdylib and returns an importable module path."""
    subprocess.run(
        ["cargo", "build", "--release", "-p", "convmix-python"],
        cwd=REPO,
        check=True,
    )
    built = REPO / "target" / "release" / "libconvmix.so"
    if not built.exists():  # e.g. macOS
        built = REPO / "target" / "release" / "libconvmix.dylib"
    target = Path(__file__).resolve().parent / "convmix.so"
    if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
        shutil.copy2(built, target)
    return target


def check(name: str, ok: bool, detail: str = "") -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return ok


def main() -> int:
    build_extension()
    sys.path.insert(0, str(Path(__file__).resolve().parent))
    import convmix

    results = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)

        # Parameters
        params = convmix.SimParams.callhome()
        results.append(check("params validate", params.validate() == []))
        results.append(check("params mode", params.mode == "markov"))
        reloaded = convmix.SimParams.from_json(params.to_json())
        results.append(check("params JSON round trip", reloaded.to_json() == params.to_json()))

        # Synthetic pool + simulation
        manifest = convmix.synth_pool(
            str(tmp / "pool"), speakers=6, utterances_per_speaker=40, seed=11, lognormal=True
        )
        pool = convmix.UtterancePool.from_manifest(manifest)
        results.append(check("pool size", pool.utterance_count() == 240))

        plan = convmix.simulate_plan(pool, params, seed=7)
        results.append(check("plan placement count", len(plan.placements()) == params.n_utt))
        plan2 = convmix.simulate_plan(pool, params, seed=7)
        results.append(
            check("plan determinism", plan.placements() == plan2.placements())
        )

        ann = plan.to_annotation()
        results.append(check("first onset is zero", ann.segments()[0][1] == 0.0))
        intervals = ann.speaker_count_intervals()
        total = sum(e - s for s, e, _ in intervals)
        results.append(
            check("interval partition", abs(total - ann.extent) < 1e-9)
        )
        results.append(
            check("at most two speakers", max(c for _, _, c in intervals) <= 2)
        )

        # RTTM round trip
        text = convmix.write_rttm([ann])
        parsed = convmix.parse_rttm(text)
        results.append(check("rttm round trip count", len(parsed) == 1))
        deltas = [
            abs(a[1] - b[1])
            for a, b in zip(ann.segments(), parsed[0].segments())
        ]
        results.append(check("rttm onset error <= 1 ms", max(deltas) <= 1e-3))

        # Metrics
        anns = [
            convmix.simulate_plan(pool, params, convmix.Rng.derive_seed(1, i)).to_annotation()
            for i in range(30)
        ]
        stats = convmix.dataset_stats(anns)
        results.append(
            check(
                "ratios in plausible band",
                0.0 < stats["silence_ratio"] < 0.5 and 0.0 < stats["overlap_ratio"] < 0.5,
                f"silence={stats['silence_ratio']:.3f} overlap={stats['overlap_ratio']:.3f}",
            )
        )
        report = convmix.compare_datasets(anns, anns)
        results.append(
            check(
                "self comparison is 1.000",
                report["silence_similarity"] == 1.0 and report["overlap_similarity"] == 1.0,
            )
        )
        results.append(check("emd identity", convmix.emd_1d([1.0, 2.0], [1.0, 2.0]) == 0.0))
        results.append(
            check(
                "similarity e^-1 at 1000 ms",
                abs(convmix.similarity_score([0.0], [1.0]) - math.exp(-1)) < 1e-12,
            )
        )

        # Estimation round trip (coarse at smoke scale)
        est, diag = convmix.estimate_params(anns)
        p_ind = est.p_ind
        results.append(
            check(
                "estimated p_ind near generating values",
                all(abs(p_ind[i] - params.p_ind[i]) < 0.08 for i in range(4)),
                f"p_ind={[round(x, 3) for x in p_ind]}",
            )
        )

        # Baseline overlaps more
        base = [
            convmix.concat_and_sum_plan(pool, 2, 30, 2.0, seed=i).to_annotation()
            for i in range(10)
        ]
        base_stats = convmix.dataset_stats(base)
        results.append(
            check(
                "concat-and-sum overlaps more",
                base_stats["overlap_ratio"] > stats["overlap_ratio"],
                f"{base_stats['overlap_ratio']:.3f} > {stats['overlap_ratio']:.3f}",
            )
        )

        # Rendering: dry render has zero energy outside labels
        small = convmix.SimParams.callhome()
        small.n_utt = 6
        rplan = convmix.simulate_plan(pool, small, seed=3)
        samples, rate, rann = convmix.render_mixture(rplan, pool, seed=3)
        active = [(s, e) for s, e, c in rann.speaker_count_intervals() if c > 0]
        outside_energy = 0.0
        for k, x in enumerate(samples):
            t = k / rate
            if not any(s <= t < e for s, e in active):
                outside_energy += x * x
        results.append(check("dry render silent outside labels", outside_energy == 0.0))

        # WAV IO
        out_wav = str(tmp / "mix.wav")
        clipped = convmix.write_wav(out_wav, samples, rate)
        samples2, rate2 = convmix.read_wav(out_wav)
        results.append(
            check(
                "wav round trip",
                clipped == 0
                and rate2 == rate
                and max(abs(a - b) for a, b in zip(samples, samples2)) <= 1 / 32768,
            )
        )

    failed = results.count(False)
    print(f"\n{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
