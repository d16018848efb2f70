//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use bracketflow::analysis::{
    classify_limit, einstein_residual, identity_audit, injectivity_lower_bound, p_derivations, soliton_residual, Verdict,
};
use bracketflow::bracket::{act_pi, bracket_eval, transformed};
use bracketflow::catalog::{berger3, semisimple_concrete_su2, semisimple_family, unimodular3, Family, ReducedFamilyPoint};
use bracketflow::curvature::{compute, delta_adjoint, delta_map, mean_curvature};
use bracketflow::flow::{
    equivalence_check, integrate, integrate_gauge, integrate_reduced, reduced_normalized_rhs, rescale_to_ricci_norm,
    FlowOptions, FlowTrajectory, GaugeSource, NormalizationStrategy, StepControl, Termination,
};
use bracketflow::linalg::{block_diag, commutator, expm, Mat, Vector};
use bracketflow::samplers::{random_gl, random_operator, random_point};
use bracketflow::HomogeneousPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b, c) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        for p in [unimodular3(a, b, c), berger3(a, b, c), semisimple_family(a, b, 1, 2).unwrap()] {
            let general = compute(&p.embed().unwrap()).ric;
            worst = worst.max((general - p.closed_ricci()).amax());
        }
    }
    check(worst <= 1e-12, format!("max entrywise gap {worst:.2e} over 3 x 200 draws"))
}

fn lemma_defect(p: &HomogeneousPoint, rng: &mut ChaCha8Rng) -> f64 {
    let mu = &p.bracket;
    let (q, n) = (mu.q(), mu.n());
    let c = compute(mu);
    let mu_p = mu.mu_p();
    let mut d = [
        delta_map(mu, &Mat::identity(n, n)).sub(&mu_p).unwrap().max_abs(),
        (delta_adjoint(mu, &mu_p) + &c.m * 4.0).amax(),
        (c.m.trace() + 0.25 * mu_p.norm2_aux()).abs(),
        (&c.ric - (&c.m - &c.b * 0.5 - &c.u)).amax(),
        (c.r - c.ric.trace()).abs(),
        (c.r - (-0.25 * mu_p.norm2_aux() - 0.5 * c.b.trace() - c.h.norm_squared())).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    for der in p_derivations(mu, 1e-10).basis {
        d = d.max((&c.m * &der).trace().abs()).max((&c.b * &der).trace().abs());
    }
    let h = random_gl(rng, n);
    let hi = h.clone().try_inverse().unwrap();
    let moved = compute(&transformed(&block_diag(&Mat::identity(q, q), &h), mu).unwrap());
    d = d.max((&moved.b - hi.transpose() * &c.b * &hi).amax());
    d = d.max((mean_curvature(&transformed(&h, &mu_p).unwrap()) - hi.transpose() * &c.h).amax());
    let mut h_full = Vector::zeros(q + n);
    h_full.rows_mut(q, n).copy_from(&c.h);
    for a in 0..q {
        let z = Vector::from_fn(q + n, |i, _| if i == a { 1.0 } else { 0.0 });
        d = d.max(bracket_eval(mu, &z, &h_full).unwrap().amax());
        let ad = mu.ad_iso_p(a);
        for op in [&c.ric, &c.m, &c.b, &c.u] {
            d = d.max(commutator(&ad, op).amax());
        }
    }
    d
}

fn lemma_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_point(&mut rng);
        worst = worst.max(lemma_defect(&p, &mut rng));
    }
    check(worst <= 1e-9, format!("max defect {worst:.2e} over 100 random points"))
}

fn pi_derivative() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let s = 1e-5;
    for _ in 0..100 {
        let p = random_point(&mut rng);
        let a = random_operator(&mut rng, p.bracket.dim());
        let fwd = transformed(&expm(&(&a * s)), &p.bracket).unwrap();
        let bwd = transformed(&expm(&(&a * -s)), &p.bracket).unwrap();
        let fd = fwd.sub(&bwd).unwrap().scaled(0.5 / s);
        let pi = act_pi(&a, &p.bracket);
        worst = worst.max(fd.sub(&pi).unwrap().norm_aux() / pi.norm_aux());
    }
    check(worst <= 1e-6, format!("max relative error {worst:.2e} over 100 pairs"))
}

fn equivalence() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, p) in [("(1,2,3)", unimodular3(1.0, 2.0, 3.0)), ("berger(1,1,0)", berger3(1.0, 1.0, 0.0))] {
        let r = equivalence_check(&p.point().unwrap(), &FlowOptions::until(0.3), 1e-6).unwrap();
        let dev = [r.bracket_gauge_pushforward, r.bracket_gauge_metric, r.metric_gauge_pushforward, r.metric_gauge_metric]
            .into_iter()
            .fold(0.0, f64::max);
        ok &= r.pass && dev <= 1e-6 && r.isotropy_drift <= 1e-9;
        details.push(format!("{name}: deviation {dev:.2e}, isotropy drift {:.1e}", r.isotropy_drift));
    }
    check(ok, details.join("; "))
}

fn audit() -> Outcome {
    let seeds = [
        unimodular3(1.0, 2.0, 3.0).point().unwrap(),
        unimodular3(1.0, 1.0, 1.0).point().unwrap(),
        unimodular3(1.0, 0.0, 0.0).point().unwrap(),
        berger3(1.0, 2.0, 0.0).point().unwrap(),
        berger3(0.5, -0.1875, 0.0).point().unwrap(),
        semisimple_concrete_su2(1.0, 0.5),
    ];
    let strategies = [
        NormalizationStrategy::Unnormalized,
        NormalizationStrategy::VolumeElement,
        NormalizationStrategy::ScalarCurvature,
    ];
    let mut worst: f64 = 0.0;
    let mut min_rate = f64::INFINITY;
    let mut ok = true;
    let mut bad = Vec::new();
    for (k, p) in seeds.iter().enumerate() {
        for s in &strategies {
            let traj = integrate(p, s, &FlowOptions::until(0.2)).unwrap();
            let rep = identity_audit(&traj).unwrap();
            let settled = matches!(traj.termination, Termination::ReachedEnd | Termination::ConvergedToFixedPoint);
            if !settled || !rep.pass {
                ok = false;
                bad.push(format!("{} on seed {k} stopped with {:?}", s.name(), traj.termination));
            }
            worst = rep.identities.iter().map(|c| c.max_rel_error).fold(worst, f64::max);
            if s.is_unnormalized() {
                min_rate = min_rate.min(rep.min_scalar_rate);
            }
        }
    }
    ok &= min_rate >= 0.0;
    let mut detail = format!("worst relative error {worst:.2e} over 6 seeds x 3 strategies; min dR/dt {min_rate:.3e}");
    for b in bad {
        detail.push_str("; ");
        detail.push_str(&b);
    }
    check(ok, detail)
}

fn reduced(a: f64, b: f64, s: &NormalizationStrategy, t_end: f64) -> FlowTrajectory {
    integrate_reduced(&berger3(a, b, 0.0), s, &FlowOptions::until(t_end)).unwrap()
}

fn three_dimensional() -> Outcome {
    let un = NormalizationStrategy::Unnormalized;
    let sc = NormalizationStrategy::ScalarCurvature;
    let mut parts = Vec::new();
    let mut ok = true;

    let t = reduced(1.0, 2.0, &un, 10.0);
    let a = t.termination == Termination::BlowupDetected && classify_limit(&t).verdict == Verdict::FiniteTimeBlowup;
    parts.push(format!("(a) blowup at t={:.4}", t.last.t));
    ok &= a;

    let t = reduced(0.0, -1.0, &un, 1e9);
    let cls = classify_limit(&t);
    let b = cls.verdict == Verdict::ZeroCollapse && cls.residuals["ric_norm"] < 1e-5;
    parts.push(format!("(b) {} with |Ric| {:.1e}", cls.verdict.name(), cls.residuals["ric_norm"]));
    ok &= b;

    let t = reduced(1.0, 2.0, &un, -50.0);
    let c = t.termination == Termination::ReachedEnd && classify_limit(&t).verdict == Verdict::BoundedAncient;
    parts.push(format!("(c) bounded on [{}, 0]", t.last.t));
    ok &= c;

    let t = reduced(0.5, -0.1875, &sc, 1e4);
    let (a_end, b_end) = (t.last.state[0], t.last.state[1]);
    let d = a_end.abs() <= 1e-3 && (b_end + 0.25).abs() <= 1e-3;
    parts.push(format!("(d) limit ({a_end:.2e}, {b_end:.6})"));
    ok &= d;

    let e = [(1.0, 1.0), (0.0, 0.75)].iter().all(|&(a, b)| {
        let v = reduced_normalized_rhs(&berger3(a, b, 0.0), &sc).unwrap();
        v.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-12
    });
    parts.push(format!("(e) fixed points {}", if e { "hold" } else { "move" }));
    ok &= e;

    let t = reduced(0.5, 1.0, &NormalizationStrategy::VolumeElement, 1e4);
    let al: f64 = 0.5;
    let f = (t.last.state[0] - al.powf(-1.0 / 3.0)).abs() <= 1e-3 && (t.last.state[1] - al.powf(-2.0 / 3.0)).abs() <= 1e-3;
    parts.push(format!("(f) limit ({:.6}, {:.6})", t.last.state[0], t.last.state[1]));
    ok &= f;

    check(ok, parts.join("; "))
}

fn semisimple() -> Outcome {
    let un = NormalizationStrategy::Unnormalized;
    let mut parts = Vec::new();
    let mut ok = true;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut region = true;
    for _ in 0..50 {
        let a0 = rng.gen_range(0.1..2.0);
        let b0 = rng.gen_range(0.0..=1.0) * a0;
        let t = integrate_reduced(&semisimple_family(a0, b0, 3, 5).unwrap(), &un, &FlowOptions::until(5.0)).unwrap();
        let mut prev = a0;
        for s in &t.samples {
            let (a, b) = (s.state[0], s.state[1]);
            region &= b >= -1e-12 && b <= a + 1e-12 && a >= prev - 1e-12;
            prev = a;
        }
    }
    parts.push(format!("(a) region {}", if region { "invariant" } else { "left" }));
    ok &= region;

    let e1 = einstein_residual(&semisimple_family(1.0, 1.0, 3, 5).unwrap().closed_ricci());
    let e2 = einstein_residual(&semisimple_family(1.0, 1.0 / 11.0, 3, 5).unwrap().closed_ricci());
    parts.push(format!("(b) Einstein residuals {e1:.1e}, {e2:.1e}"));
    ok &= e1 <= 1e-10 && e2 <= 1e-10;

    let nil = soliton_residual(&semisimple_concrete_su2(0.0, 1.0)).unwrap();
    parts.push(format!("(c) nilsoliton residual {:.1e}, |D| {:.3}", nil.residual, nil.d.norm()));
    ok &= nil.residual <= 1e-10 && nil.d.norm() > 1e-6;

    let opts = FlowOptions::until(1.0).with_tol(1e-10, 1e-13).with_samples(21);
    let mut gap: f64 = 0.0;
    for (a, b) in [(1.0, 0.5), (0.4, 1.3), (1.0, -0.5)] {
        let fam = semisimple_family(a, b, 1, 2).unwrap();
        let red = integrate_reduced(&fam, &un, &opts).unwrap();
        let full = integrate(&semisimple_concrete_su2(a, b), &un, &opts).unwrap();
        for i in 0..red.samples.len() {
            let p = ReducedFamilyPoint::project(Family::Semisimple { h_dim: 1, m_dim: 2 }, &full.bracket_at_sample(i).unwrap());
            let Ok(p) = p else {
                gap = f64::INFINITY;
                continue;
            };
            for (x, y) in p.params.iter().zip(&red.samples[i].state) {
                gap = gap.max((x - y).abs());
            }
        }
    }
    parts.push(format!("(d) reduced vs tensor gap {gap:.1e}"));
    ok &= gap <= 1e-8;

    let t = integrate_reduced(&semisimple_family(1.0, 2.0, 3, 5).unwrap(), &un, &FlowOptions::until(10.0)).unwrap();
    parts.push(format!("(e) blowup at t={:.4}", t.last.t));
    ok &= t.termination == Termination::BlowupDetected;

    check(ok, parts.join("; "))
}

fn normalizations() -> Outcome {
    let seeds = [
        unimodular3(1.0, 2.0, 3.0).point().unwrap(),
        berger3(1.0, 2.0, 0.0).point().unwrap(),
        semisimple_concrete_su2(1.0, 0.5),
    ];
    let (mut det, mut scal, mut bn, mut rn): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let dev = |t: &FlowTrajectory, f: &dyn Fn(&bracketflow::flow::Sample) -> f64| {
        let f0 = f(&t.samples[0]);
        t.samples.iter().map(|s| (f(s) - f0).abs()).fold(0.0, f64::max)
    };
    for p in &seeds {
        let span = 0.5 / (1.0 + compute(&p.bracket).ric.norm());
        let opts = FlowOptions::until(span);
        let t = integrate(p, &NormalizationStrategy::VolumeElement, &opts).unwrap();
        let g = integrate_gauge(GaugeSource::Bracket(&t), &StepControl { rtol: 1e-11, atol: 1e-13, ..StepControl::default() })
            .unwrap();
        det = g.h.iter().map(|h| (h.determinant() - 1.0).abs()).fold(det, f64::max);
        let t = integrate(p, &NormalizationStrategy::ScalarCurvature, &opts).unwrap();
        scal = scal.max(dev(&t, &|s| s.summary.scalar));
        let t = integrate(p, &NormalizationStrategy::BracketNorm, &opts).unwrap();
        bn = bn.max(dev(&t, &|s| s.summary.mu_p_norm2.sqrt()));
        let src = integrate(p, &NormalizationStrategy::Unnormalized, &FlowOptions::until(4.0 * span)).unwrap();
        let t = rescale_to_ricci_norm(&src, &opts).unwrap();
        rn = rn.max(dev(&t, &|s| s.summary.ric_norm.powi(2)));
    }
    check(
        det <= 1e-8 && scal <= 1e-6 && bn <= 1e-6 && rn <= 1e-6,
        format!("|det h - 1| {det:.1e}, |R - R0| {scal:.1e}, |mu_p| drift {bn:.1e}, tr Ric^2 drift {rn:.1e}"),
    )
}

fn injectivity() -> Outcome {
    let one = injectivity_lower_bound(&berger3(1.0, 1.0, 0.0).point().unwrap()).unwrap();
    let closed = (one.family.unwrap().value() - PI / 8f64.sqrt()).abs();
    let infinite = [-1.0, -0.25, 0.0].iter().all(|&b| {
        injectivity_lower_bound(&berger3(0.8, b, 0.0).point().unwrap()).unwrap().family.is_some_and(|r| r.is_infinite())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut generic: f64 = 0.0;
    for _ in 0..100 {
        let p = random_point(&mut rng);
        let b = injectivity_lower_bound(&p).unwrap();
        generic = generic.max((b.generic.value() - PI / p.bracket.norm_aux()).abs());
    }
    check(
        closed <= 1e-15 && infinite && generic == 0.0,
        format!("(1,1) gap {closed:.1e}; b <= 0 unbounded: {infinite}; generic gap {generic:.1e}"),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_bracketflow"))
        .args(args)
        .arg("--out")
        .arg(out)
        .stdout(Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.success(), "{args:?} exited with {status}");
    let name = if args[0] == "sweep" { "sweep.csv" } else { "trajectory.csv" };
    std::fs::read(out.join(name)).expect("csv written")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"family": "berger3", "params": [1.0, 2.0, 0.0], "strategy": "volume-element", "t_span": [0.0, 0.3], "samples": 31,
            "axes": [{"name": "a", "lo": 0.0, "hi": 2.0, "count": 4}, {"name": "b", "lo": -1.0, "hi": 2.0, "count": 4}]}"#,
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    let mut same = true;
    let mut sizes = Vec::new();
    for cmd in ["flow", "sweep"] {
        let first = run_cli(&[cmd, "--config", cfg], &dir.path().join(format!("{cmd}-1")));
        let second = run_cli(&[cmd, "--config", cfg], &dir.path().join(format!("{cmd}-2")));
        same &= first == second;
        sizes.push(format!("{cmd} {} bytes", first.len()));
    }
    check(same, format!("{} byte-identical across two runs", sizes.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed-form curvature", closed_forms),
        ("structural identity suite", lemma_suite),
        ("pi derivative", pi_derivative),
        ("bracket/metric equivalence", equivalence),
        ("evolution identity audit", audit),
        ("three-dimensional dynamics", three_dimensional),
        ("semisimple family dynamics", semisimple),
        ("normalization contracts", normalizations),
        ("injectivity bounds", injectivity),
        ("CSV determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.2}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
