//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, then exits non-zero if any
//! criterion failed.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use frameforge::spec::rat;
use frameforge::stability::classify_critical_point_with_gap;
use frameforge::topology::{certify_neighborhood_connectivity_with_c, codimension_bound_with_c};
use frameforge::{
    best_ansatz_constant, certify_connectivity, check_admissible, check_property_s, classify_critical_point,
    codimension_bound, column_norms_sq, descend, descend_with_observer, energy, frame_energy_bc, frame_potential,
    gradient, is_full_spark, random_full_spark_init, CriticalKind, Field, FlowConfig, FrameMatrix, NormSpec, Outcome,
    Rational, Tolerances,
};
use rand::Rng;
use rayon::prelude::*;

use common::*;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_secs), || {
        format!("runtime {:.1}s exceeds {limit_secs}s", elapsed.as_secs_f64())
    })
}

const FIELDS: [Field; 2] = [Field::Real, Field::Complex];

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for field in FIELDS {
        let mut rng = rng(1000 + field as u64);
        for pair in 0..50 {
            let d = rng.random_range(1..=4);
            let n = rng.random_range(1..=8);
            let r: Vec<Rational> = (0..n).map(|_| rat(rng.random_range(1..=8), rng.random_range(1..=8))).collect();
            let spec = NormSpec::new(d, r).unwrap();
            let f = gaussian(d, n, field, &mut rng);
            let g = gradient(&f, &spec).unwrap();
            let err = max_relative_error(g.as_matrix(), &fd_gradient(&f, &spec, 1e-5));
            worst = worst.max(err);
            ensure(err < 1e-6, || format!("{field} pair {pair} (d={d}, n={n}): relative error {err:.3e}"))?;
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!("100 pairs, worst relative error {worst:.2e}, {:.2}s", start.elapsed().as_secs_f64()))
}

struct DeskRun {
    spec: NormSpec,
    terminal: FrameMatrix,
}

fn criterion_2(runs_out: &mut Vec<DeskRun>) -> Verdict {
    let start = Instant::now();
    let cfg = FlowConfig::default();
    let jobs: Vec<(NormSpec, Field, u64)> = desk_specs()
        .into_iter()
        .flat_map(|s| FIELDS.into_iter().flat_map(move |f| (0..25u64).map({ let s = s.clone(); move |k| (s.clone(), f, k) })))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(spec, field, seed)| {
            let f0 = random_full_spark_init(spec.d(), spec.n(), *field, *seed).unwrap();
            (spec.clone(), *field, *seed, descend(&f0, spec, &cfg).unwrap())
        })
        .collect();
    let elapsed = start.elapsed();
    let total = results.len();
    let mut failures = Vec::new();
    for (spec, field, seed, report) in results {
        let ok = report.outcome == Outcome::ConvergedToPF
            && report.parseval_residual < 1e-8
            && report.norm_residual < 1e-8;
        if !ok {
            failures.push(format!("{:?} {field} seed {seed}: {}", spec.r_f64(), report.outcome));
        }
        runs_out.push(DeskRun { spec, terminal: report.terminal });
    }
    ensure(failures.is_empty(), || format!("{}/{total} runs failed: {}", failures.len(), failures.join("; ")))?;
    within(elapsed, 120)?;
    Ok(format!("{total}/{total} runs ConvergedToPF, {:.1}s", elapsed.as_secs_f64()))
}

fn criterion_3() -> Verdict {
    let (f, spec) = blockwise_example();
    let e = energy(&f, &spec).unwrap().total;
    let exact = 66.0 / 1025.0;
    ensure((e - exact).abs() <= 1e-12, || format!("energy {e} differs from 66/1025 by {:.3e}", (e - exact).abs()))?;
    let cfg = FlowConfig::default();
    let mut reached = 0;
    for trial in 0..20u64 {
        let noise = gaussian(2, 3, Field::Real, &mut rng(300 + trial));
        let report = descend(&axpy(&f, 1e-3, &noise), &spec, &cfg).unwrap();
        if report.outcome == Outcome::ConvergedToPF {
            reached += 1;
        }
    }
    ensure(reached == 20, || format!("{reached}/20 perturbed trials reached PF"))?;
    Ok(format!("energy 66/1025 within {:.1e}, 20/20 perturbed trials reached PF", (e - exact).abs()))
}

fn criterion_4(terminals: &mut Vec<(FrameMatrix, NormSpec)>) -> Verdict {
    let spec = NormSpec::equal_norm(3, 5).unwrap();
    let cfg = FlowConfig::default();
    let mut observed = 0usize;
    for run in 0..10u64 {
        let field = FIELDS[(run % 2) as usize];
        let mut m = random_full_spark_init(3, 5, field, 400 + run).unwrap().into_matrix();
        m.column_mut(2).fill(frameforge::Scalar::new(0.0, 0.0));
        let f0 = with_matrix(field, m);
        let mut violation = None;
        let report = descend_with_observer(&f0, &spec, &cfg, |it, f| {
            observed += 1;
            let bitwise_zero = f.column(2).iter().all(|z| z.re.to_bits() == 0 && z.im.to_bits() == 0);
            if !bitwise_zero && violation.is_none() {
                violation = Some(it);
            }
        })
        .unwrap();
        ensure(violation.is_none(), || format!("run {run}: column 3 became nonzero at iteration {violation:?}"))?;
        ensure(report.zero_column_indices.contains(&2), || format!("run {run}: report lost the zero column"))?;
        terminals.push((report.terminal, spec.clone()));
    }
    Ok(format!("10 runs, column 3 bitwise zero at all {observed} observed iterates"))
}

fn criterion_5() -> Verdict {
    let tol = Tolerances::default();
    let mut rng = rng(500);
    let specs = desk_specs();

    let mut semistable_cases = Vec::new();
    while semistable_cases.len() < 100 {
        let spec = specs[semistable_cases.len() % specs.len()].clone();
        let field = FIELDS[semistable_cases.len() % 2];
        let f = gaussian(spec.d(), spec.n(), field, &mut rng);
        if !is_full_spark(&f, &tol).unwrap().full_spark {
            continue;
        }
        let verdict = check_property_s(&f, &spec, &tol).unwrap();
        ensure(verdict.semistable, || format!("full-spark frame judged unstable: {:?}", verdict.witness))?;
        semistable_cases.push((f, spec));
    }

    // pair specs: the first two entries sum to more than 1
    let pair_specs: Vec<NormSpec> = specs.iter().filter(|s| &s.r()[0] + &s.r()[1] > rat(1, 1)).cloned().collect();
    let mut unstable_cases = Vec::new();
    for case in 0..100 {
        let field = FIELDS[case % 2];
        let (spec, f, expected) = if case < 50 {
            let spec = specs[case % specs.len()].clone();
            let j = rng.random_range(0..spec.n());
            let mut m = gaussian(spec.d(), spec.n(), field, &mut rng).into_matrix();
            m.column_mut(j).fill(frameforge::Scalar::new(0.0, 0.0));
            (spec, with_matrix(field, m), (vec![j], 0usize))
        } else {
            let spec = pair_specs[case % pair_specs.len()].clone();
            let mut m = gaussian(spec.d(), spec.n(), field, &mut rng).into_matrix();
            let scale: f64 = rng.random_range(0.2..3.0);
            let col = m.column(0) * frameforge::Scalar::new(scale, 0.0);
            m.set_column(1, &col);
            (spec, with_matrix(field, m), (vec![0, 1], 1usize))
        };
        let verdict = check_property_s(&f, &spec, &tol).unwrap();
        let w = verdict.witness.as_ref();
        let correct = !verdict.semistable
            && w.is_some_and(|w| w.indices == expected.0 && w.rank == expected.1 && w.weight_sum > rat(w.rank as i64, 1));
        ensure(correct, || format!("crafted case {case}: expected witness {:?}, got {:?}", expected, verdict.witness))?;
        unstable_cases.push((f, spec));
    }

    let mut transforms = 0;
    for (f, spec) in semistable_cases.iter().chain(unstable_cases.iter()) {
        let base = check_property_s(f, spec, &tol).unwrap();
        for _ in 0..10 {
            let g = unit_det_matrix(f.d(), f.field(), &mut rng);
            let phases = unit_phases(f.n(), f.field(), &mut rng);
            let moved = check_property_s(&transform(f, &g, &phases), spec, &tol).unwrap();
            let same = moved.semistable == base.semistable
                && moved.witness.as_ref().map(|w| (&w.indices, w.rank))
                    == base.witness.as_ref().map(|w| (&w.indices, w.rank));
            ensure(same, || format!("verdict changed under transform: {:?} vs {:?}", base, moved))?;
            transforms += 1;
        }
    }
    Ok(format!("100 semistable, 100 unstable with correct witnesses, {transforms} invariant transforms"))
}

fn criterion_6(desk: &[DeskRun], zero_terminals: &[(FrameMatrix, NormSpec)]) -> Verdict {
    let tol = Tolerances::default();
    ensure(!desk.is_empty(), || "no terminal frames from criterion 2".into())?;
    for run in desk {
        let class = classify_critical_point(&run.terminal, &run.spec, &tol).unwrap();
        ensure(class.kind == CriticalKind::GlobalMinimumPF, || {
            format!("terminal frame for {:?} classified {:?}", run.spec.r_f64(), class.kind)
        })?;
    }

    let (f, spec) = blockwise_example();
    let class = classify_critical_point(&f, &spec, &tol).unwrap();
    ensure(class.kind == CriticalKind::BlockwiseTight, || format!("blockwise example classified {:?}", class.kind))?;
    let blocks: Vec<(Vec<usize>, f64)> = class.blocks.iter().map(|b| (b.columns.clone(), b.eigenvalue)).collect();
    let expected = [(vec![0, 1], 44.0 / 41.0), (vec![2], 22.0 / 25.0)];
    let blocks_ok = blocks.len() == 2
        && blocks.iter().zip(&expected).all(|((c, l), (ec, el))| c == ec && (l - el).abs() < 1e-10);
    ensure(blocks_ok, || format!("blockwise example blocks {blocks:?}"))?;

    // every non-minimizing classification must be unstable
    let mut candidates: Vec<(FrameMatrix, NormSpec)> = vec![blockwise_example(), zero_column_example()];
    candidates.extend(zero_terminals.iter().cloned());
    let mut confirmed = 0;
    for (f, spec) in &candidates {
        let class = classify_critical_point_with_gap(f, spec, &Tolerances { grad_tol: 1e-8, ..tol }, 1e-6).unwrap();
        if matches!(class.kind, CriticalKind::BlockwiseTight | CriticalKind::WithZeroColumns) {
            let verdict = check_property_s(f, spec, &tol).unwrap();
            ensure(!verdict.semistable, || format!("{:?} critical point judged semistable", class.kind))?;
            confirmed += 1;
        }
    }
    ensure(confirmed >= 2, || format!("only {confirmed} non-minimizing critical points were classified"))?;
    Ok(format!(
        "{} terminal frames GlobalMinimumPF, blockwise blocks {{1,2}}/{{3}} with 44/41, 22/25, {confirmed} non-minimizing points unstable",
        desk.len()
    ))
}

fn criterion_7() -> Verdict {
    let mut tested = 0;
    let mut spec_pool: Vec<NormSpec> = desk_specs();
    for d in 1..=4 {
        for n in d..=6 {
            spec_pool.extend(enumerate_admissible(d, n, 4));
        }
    }
    for spec in &spec_pool {
        let cert = certify_connectivity(spec, Field::Complex, 0).unwrap();
        ensure(cert.certified, || format!("complex q=0 not certified for d={} r={:?}", spec.d(), spec.r_f64()))?;
        tested += 1;
    }

    let one = rat(1, 1);
    let mut neighborhood_checks = 0;
    for d in 2..=6usize {
        let threshold = rat((2 * d * d) as i64, (d - 1) as i64);
        let top = 3 * (2 * d * d) / (d - 1) + 3;
        for n in d + 1..=top {
            let spec = NormSpec::equal_norm(d, n).unwrap();
            let cert = certify_neighborhood_connectivity_with_c(&spec, &one).unwrap();
            let expected = rat(n as i64, 1) >= threshold;
            ensure(cert.certified == expected, || {
                format!("neighborhood certificate d={d} n={n}: got {}, expected {expected}", cert.certified)
            })?;
            neighborhood_checks += 1;
        }
    }

    let mut codim_checks = 0;
    for d in 2..=6usize {
        let threshold = rat((d * (2 * d - 1)) as i64, (d - 1) as i64);
        for n in d + 1..=d + 30 {
            if rat(n as i64, 1) < threshold {
                continue;
            }
            let spec = NormSpec::equal_norm(d, n).unwrap();
            let with_one = codimension_bound_with_c(d, n, &one, Field::Real);
            let with_best = codimension_bound(&spec, Field::Real).unwrap();
            let dd = rat(d as i64, 1);
            ensure(with_one == dd && with_best == dd, || {
                format!("equal-norm codimension d={d} n={n}: c=1 gives {with_one}, c_best gives {with_best}")
            })?;
            codim_checks += 1;
        }
        for n in d + 1..=d + 6 {
            for eps in [rat(1, 10), rat(1, 100), rat(1, 7)] {
                let mut r = vec![rat(1, 1); d - 1];
                r.push(rat(1, 1) - &eps);
                r.extend(std::iter::repeat_n(eps.clone() / rat((n - d) as i64, 1), n - d));
                let spec = NormSpec::new(d, r).unwrap();
                ensure(check_admissible(&spec).admissible, || format!("near-degenerate d={d} n={n} not admissible"))?;
                let ansatz = best_ansatz_constant(&spec).unwrap();
                let floor = rat((d * d) as i64, (n * (d - 1)) as i64);
                let codim = codimension_bound(&spec, Field::Real).unwrap();
                ensure(ansatz.c_best == floor && codim == rat(1, 1), || {
                    format!("near-degenerate d={d} n={n}: c_best {} codim {codim}", ansatz.c_best)
                })?;
                codim_checks += 1;
            }
        }
    }
    Ok(format!(
        "{tested} specs complex 0-connected, {neighborhood_checks} neighborhood iff checks, {codim_checks} codimension checks"
    ))
}

fn criterion_8() -> Verdict {
    let mut rng = rng(800);
    let mut worst = [0.0f64; 3];
    for trial in 0..50 {
        let field = FIELDS[trial % 2];
        let d = rng.random_range(1..=4);
        let n = rng.random_range(d..=8);
        let rq = rat(rng.random_range(1..=6), rng.random_range(1..=6));
        let spec = NormSpec::new(d, vec![rq.clone(); n]).unwrap();
        let r = frameforge::spec::rational_to_f64(&rq);
        let f = equalize_norms(&gaussian(d, n, field, &mut rng), r);
        let lhs = energy(&f, &spec).unwrap().total;
        let rhs = frame_potential(&f) - 2.0 * n as f64 * r + d as f64;
        let e = rel_err(lhs, rhs);
        worst[0] = worst[0].max(e);
        ensure(e < 1e-10, || format!("equal-norm identity trial {trial}: {lhs} vs {rhs}"))?;
    }
    for trial in 0..50 {
        let field = FIELDS[trial % 2];
        let d = rng.random_range(1..=4);
        let n = rng.random_range(d + 1..=9);
        let f = canonical_parseval(&gaussian(d, n, field, &mut rng));
        let spec = NormSpec::equal_norm(d, n).unwrap();
        let fourth: f64 = column_norms_sq(&f).iter().map(|m| m * m).sum();
        let (nf, df) = (n as f64, d as f64);

        let lhs = energy(&f, &spec).unwrap().total;
        let rhs = 0.25 * nf * nf / (df * df) * fourth - nf / 4.0;
        let e = rel_err(lhs, rhs);
        worst[1] = worst[1].max(e);
        ensure(e < 1e-10, || format!("Parseval energy identity trial {trial}: {lhs} vs {rhs}"))?;

        let lhs = frame_energy_bc(&f);
        let rhs = 2.0 * nf * fourth - 2.0 * df * df;
        let e = rel_err(lhs, rhs);
        worst[2] = worst[2].max(e);
        ensure(e < 1e-10, || format!("frame energy identity trial {trial}: {lhs} vs {rhs}"))?;
    }
    Ok(format!(
        "worst relative errors: potential {:.1e}, Parseval energy {:.1e}, frame energy {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn main() {
    let mut desk = Vec::new();
    let mut zero_terminals = Vec::new();
    let mut results: Vec<(usize, &str, Verdict, Duration)> = Vec::new();
    let mut run = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let verdict = f();
        let elapsed = start.elapsed();
        let (tag, detail) = match &verdict {
            Ok(s) => ("PASS", s.clone()),
            Err(s) => ("FAIL", s.clone()),
        };
        println!("criterion {id} [{name}]: {tag} ({detail}) [{:.2}s]", elapsed.as_secs_f64());
        results.push((id, name, verdict, elapsed));
    };
    run(1, "gradient vs finite differences", &mut criterion_1);
    run(2, "descent reaches PF at desk scale", &mut || criterion_2(&mut desk));
    run(3, "no spurious minima near the blockwise critical point", &mut criterion_3);
    run(4, "zero columns stay bitwise zero", &mut || criterion_4(&mut zero_terminals));
    run(5, "stability oracle soundness and invariance", &mut criterion_5);
    run(6, "critical point classifier", &mut || criterion_6(&desk, &zero_terminals));
    run(7, "exact topology certificates", &mut criterion_7);
    run(8, "energy identities", &mut criterion_8);

    let failed: BTreeSet<usize> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
