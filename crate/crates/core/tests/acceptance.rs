use std::time::{Duration, Instant};

use superext::catalog::{cage_from_cartesian, cage_model, cage_partner_of_ttw, cage_seed, golden_k21, harmonic_seed, polar_cartesian_map, ttw_from_polar, ttw_model, ttw_seed, MapDirection};
use superext::dynamics::{hamiltons_equations, integrate_adaptive, monitor_invariants, TrajectoryConfig};
use superext::expr::{parse_coeff, Coeff, Param, Scalar};
use superext::extension::{
    build_extended_h, build_k, build_modified_k, check_e2_system, check_lemma_conditions, closed_form_apply, expand_modified_k, make_profile, recursion_gn, solve_linear_seed, u_operator, LemmaCondition, LemmaInputs,
    LinearCase, LinearInputs, Parity, Profile, Seed,
};
use superext::job::{cmd_verify, JobConfig};
use superext::poisson::{PPoly, PhasePoint, EXT};
use superext::verify::{golden_compare, independence_rank, sample_points, SampleRegion};

type Outcome = Result<String, String>;

fn int(i: i64) -> Scalar {
    Scalar::from_integer(i.into())
}

fn coeff(s: &str) -> Coeff {
    parse_coeff(s).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(limit: Duration, label: &str, f: impl FnOnce() -> Result<(), String>) -> Result<Duration, String> {
    let t = Instant::now();
    f()?;
    let dt = t.elapsed();
    ensure(dt < limit, || format!("{label} took {dt:?}, limit {limit:?}"))?;
    Ok(dt)
}

fn curved(m: u32, n: u32, omega: &Coeff) -> Profile {
    make_profile(m, n, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), omega).unwrap()
}

fn flat(m: u32, n: u32, omega: &Coeff) -> Profile {
    make_profile(m, n, &int(0), &Coeff::param(Param::L0), &int(0), &Coeff::one(), omega).unwrap()
}

fn profile_for(seed: &Seed, m: u32, n: u32, omega: &Coeff) -> Profile {
    if seed.c == int(0) {
        flat(m, n, omega)
    } else {
        curved(m, n, omega)
    }
}

const LAMBDAS: [(u32, u32); 5] = [(1, 1), (2, 1), (1, 2), (3, 1), (3, 2)];

fn plain_commutation() -> Outcome {
    let seed = ttw_seed();
    let mut slowest = Duration::ZERO;
    for (m, n) in LAMBDAS {
        let dt = timed(Duration::from_secs(60), &format!("lambda {m}/{n}"), || {
            let p = curved(2 * m, n, &Coeff::zero());
            let h = build_extended_h(&p, &seed.l).map_err(|e| e.to_string())?;
            let k = build_k(&p, &seed).map_err(|e| e.to_string())?;
            let r = h.bracket(&k).map_err(|e| e.to_string())?;
            ensure(r.is_zero(), || format!("lambda {m}/{n}: {{H, K}} has {} terms", r.term_count()))
        })?;
        slowest = slowest.max(dt);
    }
    Ok(format!("5 lambdas, slowest {slowest:.2?}"))
}

fn modified_commutes(h: &PPoly, k: &PPoly, label: &str) -> Result<(), String> {
    let r = h.bracket(k).map_err(|e| e.to_string())?;
    ensure(r.is_zero(), || format!("{label}: residual with {} terms", r.term_count()))
}

fn even_branch() -> Outcome {
    let one = int(1);
    let mut slowest = Duration::ZERO;
    for (m, n) in [(1, 1), (2, 1), (3, 2)] {
        let t = ttw_model(m, n, &one, &int(2), &one).map_err(|e| e.to_string())?;
        ensure(t.k_meta.branch == Parity::Even, || format!("ttw {m}/{n} not on the even branch"))?;
        slowest = slowest.max(timed(Duration::from_secs(120), "ttw", || modified_commutes(&t.h_bar, &t.k_bar, &format!("ttw {m}/{n}")))?);
    }
    for (m, n) in [(2, 1), (4, 3)] {
        let c = cage_model(m, n, &one, &one, &one, &one).map_err(|e| e.to_string())?;
        ensure(c.k_meta.branch == Parity::Even, || format!("cage ({m},{n}) not on the even branch"))?;
        slowest = slowest.max(timed(Duration::from_secs(120), "cage", || modified_commutes(&c.h_bar, &c.k_bar, &format!("cage ({m},{n})")))?);
    }
    Ok(format!("5 models, omega symbolic, slowest {slowest:.2?}"))
}

fn odd_branch() -> Outcome {
    let one = int(1);
    for (m, n) in [(1, 1), (3, 2)] {
        let c = cage_model(m, n, &one, &one, &one, &one).map_err(|e| e.to_string())?;
        let meta = &c.k_meta;
        ensure(meta.branch == Parity::Odd && meta.effective_m == 2 * m && meta.effective_n == 2 * n && meta.g_index == 2 * n && meta.power == m, || {
            format!("cage ({m},{n}) dispatch {meta:?}")
        })?;
        modified_commutes(&c.h_bar, &c.k_bar, &format!("cage ({m},{n})"))?;
    }
    Ok("cage (1,1), (3,2) via (2m,2n) and G_2n".into())
}

fn recursion_law() -> Outcome {
    for (name, seed) in [("ttw", ttw_seed()), ("cage", cage_seed()), ("harmonic", harmonic_seed())] {
        for (i, gk) in seed.recursion(5).iter().enumerate() {
            let k = i as u32 + 1;
            ensure(seed.recursion_residual(gk, k).is_zero(), || format!("{name}: G_{k} fails"))?;
        }
    }
    Ok("3 seeds, n <= 5".into())
}

fn closed_form() -> Outcome {
    let mut checked = 0;
    for seed in [ttw_seed(), cage_seed()] {
        for n in 1..=3 {
            let gn = recursion_gn(&seed, n);
            for m in 1..=6 {
                let p = profile_for(&seed, m, n, &Coeff::zero());
                let u = u_operator(&p, &seed.l).map_err(|e| e.to_string())?;
                let mut it = gn.clone();
                for r in 0..=m {
                    let cf = closed_form_apply(&p, &seed, r, &gn).map_err(|e| e.to_string())?;
                    ensure(cf == it, || format!("m={m} n={n} r={r}"))?;
                    checked += 1;
                    it = u.apply(&it);
                }
            }
        }
    }
    Ok(format!("{checked} (seed, m, n, r) cases"))
}

fn binomial_expansion() -> Outcome {
    let omega = Coeff::param(Param::Omega);
    let mut cases = Vec::new();
    for s in 1..=3u32 {
        cases.push((ttw_seed(), 2 * s, 1));
        cases.push((cage_seed(), 2 * s, 1));
    }
    cases.push((cage_seed(), 1, 1));
    cases.push((cage_seed(), 3, 1));
    for (seed, m, n) in &cases {
        let p = profile_for(seed, *m, *n, &omega);
        let built = build_modified_k(&p, seed).map_err(|e| e.to_string())?;
        ensure(built.meta.power <= 3, || format!("power {}", built.meta.power))?;
        let expanded = expand_modified_k(&p, seed).map_err(|e| e.to_string())?;
        ensure(expanded == built.k, || format!("(m,n)=({m},{n}) differs"))?;
    }
    Ok(format!("{} profiles, s = 1..3, both branches", cases.len()))
}

fn golden() -> Outcome {
    let t = ttw_model(1, 1, &int(1), &int(2), &int(1)).map_err(|e| e.to_string())?;
    let pts = sample_points(2024, 100, &SampleRegion::default());
    let g = golden_compare(&t.k_bar, &golden_k21(), &t.values, &pts).map_err(|e| e.to_string())?;
    ensure(g.accepted == 100, || format!("{} points rejected", g.rejected))?;
    ensure(g.max_deviation < 1e-12, || format!("max deviation {:e}", g.max_deviation))?;
    ensure(g.exact_constant.as_deref() == Some("1"), || format!("constant {:?}", g.exact_constant))?;
    Ok(format!("constant 1, max deviation {:.1e}", g.max_deviation))
}

fn lemma_conditions() -> Outcome {
    let omega = Coeff::param(Param::Omega);
    let mut n = 0;
    for (seed, m, k) in [(ttw_seed(), 2, 1), (ttw_seed(), 6, 2), (cage_seed(), 4, 3), (cage_seed(), 1, 1)] {
        let p = profile_for(&seed, m, k, &omega);
        let inp = LemmaInputs::for_modified_extension(&p, &seed).map_err(|e| e.to_string())?;
        let rep = check_lemma_conditions(&inp, Some(&omega)).map_err(|e| e.to_string())?;
        ensure(rep.all_ok && rep.f0_value.as_ref() == Some(&omega), || format!("({m},{k}): {rep:?}"))?;
        n += 1;
    }
    let seed = ttw_seed();
    let base = LemmaInputs::for_modified_extension(&curved(2, 1, &omega), &seed).map_err(|e| e.to_string())?;
    let bump = coeff("u");
    let perturbed = [
        (LemmaCondition::StructuralEquation, LemmaInputs { g: base.g.add(&PPoly::momentum(0).pow(3)), ..base.clone() }),
        (LemmaCondition::GammaOde, LemmaInputs { gamma: &base.gamma + &coeff("u^2"), ..base.clone() }),
        (LemmaCondition::AlphaRelation, LemmaInputs { alpha: &base.alpha + &Coeff::one(), ..base.clone() }),
        (LemmaCondition::FForm, LemmaInputs { f: &base.f + &bump, ..base.clone() }),
        (LemmaCondition::HForm, LemmaInputs { h: &base.h + &bump, ..base.clone() }),
    ];
    for (cond, inp) in perturbed {
        let rep = check_lemma_conditions(&inp, Some(&omega)).map_err(|e| e.to_string())?;
        ensure(!rep.passed(cond) && !rep.all_ok, || format!("{cond:?} perturbation not detected"))?;
    }
    Ok(format!("{n} instances pass with f0 = omega, 5 perturbations detected"))
}

fn linear_table() -> Outcome {
    let sym = |p| Coeff::param(p);
    let row = |c: i64, a1: Coeff, a2: Coeff| LinearInputs { c: int(c), a1, a2, c1: sym(Param::C1), c2: sym(Param::C2), l0: sym(Param::L0), case: None };
    let rows = [
        (row(1, Coeff::one(), Coeff::zero()), LinearCase::Curved, "sin(q)"),
        (row(0, Coeff::one(), Coeff::zero()), LinearCase::FlatAffine, "q"),
        (row(0, Coeff::zero(), Coeff::one()), LinearCase::FlatConstant, "1"),
    ];
    for (inp, case, eta) in rows {
        let fam = solve_linear_seed(&inp).map_err(|e| e.to_string())?;
        ensure(fam.case == case && fam.eta == coeff(eta), || format!("{case:?}: eta = {}", fam.eta))?;
        ensure(fam.certified && fam.residuals.iter().all(Coeff::is_zero), || format!("{case:?} residuals {:?}", fam.residuals))?;
        let e2 = check_e2_system(&fam.v, &[Coeff::zero(), fam.eta.clone()], &fam.c, &fam.l0);
        ensure(e2.ok, || format!("{case:?}: coefficient system rejects the row"))?;
    }
    let bad = check_e2_system(&coeff("c1*q^3 + c2/q"), &[Coeff::zero(), Coeff::zero(), Coeff::one()], &int(0), &Coeff::param(Param::L0));
    ensure(!bad.ok, || "generic degree-2 counterexample accepted".into())?;
    Ok("3 rows certified, degree-2 counterexample rejected".into())
}

fn independence() -> Outcome {
    let one = int(1);
    let pts = sample_points(17, 100, &SampleRegion::default());
    let mut counts = Vec::new();
    for m in [ttw_model(1, 1, &one, &int(2), &one), cage_model(2, 1, &one, &one, &one, &one)] {
        let m = m.map_err(|e| e.to_string())?;
        let r = independence_rank(&[m.h_bar.clone(), m.k_bar.clone(), m.seed.l.clone()], &m.values, &pts).map_err(|e| e.to_string())?;
        let full = r.count_at(3);
        ensure(full >= 95, || format!("{}: rank 3 at {full}/100", m.name))?;
        counts.push(full);
    }
    Ok(format!("rank 3 at {}/100 (ttw 1) and {}/100 (cage (2,1))", counts[0], counts[1]))
}

fn polar_pair() -> Outcome {
    let (a1, a2, w) = (int(1), int(2), int(3));
    let t = ttw_model(1, 1, &a1, &a2, &w).map_err(|e| e.to_string())?;
    let c = cage_partner_of_ttw(&a1, &a2, &w).map_err(|e| e.to_string())?;
    let region = SampleRegion { positions: (0.3, 1.2), momenta: (-1.0, 1.0) };
    let mut worst: f64 = 0.0;
    for polar in sample_points(5, 100, &region) {
        // (r, theta) with theta inside the first quadrant
        let polar = PhasePoint::new([polar.q[1], polar.q[0]], polar.p);
        let cart = polar_cartesian_map(&polar, MapDirection::PolarToCartesian).map_err(|e| e.to_string())?;
        let ht = t.h_bar.eval_f64(&ttw_from_polar(&polar, 1, 1), &t.values).map_err(|e| e.to_string())?;
        let hc = c.h_bar.eval_f64(&cage_from_cartesian(&cart, 2, 1), &c.values).map_err(|e| e.to_string())?;
        worst = worst.max((ht - hc).abs() / ht.abs().max(f64::MIN_POSITIVE));
    }
    ensure(worst < 1e-12, || format!("relative error {worst:e}"))?;
    Ok(format!("100 points, max relative error {worst:.1e}"))
}

fn dynamics() -> Outcome {
    let t0 = Instant::now();
    let m = ttw_model(2, 1, &int(1), &int(2), &int(1)).map_err(|e| e.to_string())?;
    let f = hamiltons_equations(&m.h_bar, &m.values);
    let mut cfg = TrajectoryConfig::new([1.0, 1.0, 0.3, 0.2], 100.0, 1e-12);
    cfg.stride = Some(0.1);
    let tr = integrate_adaptive(&cfg, &f).map_err(|e| e.to_string())?;
    ensure(tr.aborted.is_none(), || format!("aborted: {:?}", tr.aborted))?;
    let inv = vec![("H".to_string(), m.h_bar.clone()), ("K".to_string(), m.k_bar.clone()), ("L".to_string(), m.seed.l.clone()), ("p_u".to_string(), PPoly::momentum(EXT))];
    let rep = monitor_invariants(&tr, &inv, &m.values);
    let mut worst: f64 = 0.0;
    for name in ["H", "K", "L"] {
        let e = rep.get(name).unwrap();
        ensure(e.relative && e.max_drift < 1e-8, || format!("{name} drift {:e}", e.max_drift))?;
        worst = worst.max(e.max_drift);
    }
    let pu = rep.get("p_u").unwrap().max_drift;
    ensure(pu > 0.1, || format!("p_u drift only {pu:e}"))?;
    let dt = t0.elapsed();
    ensure(dt < Duration::from_secs(60), || format!("took {dt:?}"))?;
    Ok(format!("max drift {worst:.1e}, p_u drift {pu:.2}, {} steps in {dt:.2?}", tr.steps))
}

fn determinism() -> Outcome {
    let cfg = JobConfig::from_json(r#"{"command": "verify", "model": {"name": "cage"}, "m": 2, "n": 1, "verify": {"samples": 50, "seed": 42}}"#).map_err(|e| e.to_string())?;
    let a = cmd_verify(&cfg).map_err(|e| e.to_string())?;
    let b = cmd_verify(&cfg).map_err(|e| e.to_string())?;
    ensure(a.exit_code == 0, || "verify failed".into())?;
    ensure(a.document.as_bytes() == b.document.as_bytes(), || "reports differ".into())?;
    Ok(format!("{} identical bytes", a.document.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("plain extension commutation", plain_commutation),
        ("modified extension, even branch", even_branch),
        ("modified extension, odd branch", odd_branch),
        ("recursion law", recursion_law),
        ("closed form for U^r(G_n)", closed_form),
        ("binomial expansion", binomial_expansion),
        ("golden K_bar for lambda = 1", golden),
        ("structural conditions and perturbations", lemma_conditions),
        ("linear seed table", linear_table),
        ("functional independence", independence),
        ("TTW / cage correspondence", polar_pair),
        ("conservation along trajectories", dynamics),
        ("deterministic reports", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        match check() {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
            Err(why) => {
                println!("FAIL {id:>2} {name}: {why}");
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
