use std::f64::consts::FRAC_PI_2;

use num_traits::Zero;

use super::*;
use crate::expr::{int, parse_coeff, rat, Coeff, ExprError, Param, Scalar};
use crate::poisson::{apply_xl, Mom, PPoly, BASE, EXT};

fn c(s: &str) -> Coeff {
    parse_coeff(s).unwrap()
}

fn pq() -> PPoly {
    PPoly::momentum(BASE)
}

fn pu() -> PPoly {
    PPoly::momentum(EXT)
}

fn natural(v: &Coeff) -> PPoly {
    pq().pow(2).scale(&rat(1, 2)).add(&PPoly::constant(v.clone()))
}

fn ttw_seed() -> Seed {
    Seed::new(natural(&c("(c1 + c2*cos(q))/sin(q)^2")), pq().mul_coeff(&c("sin(q)")), int(1), Coeff::zero()).unwrap()
}

fn cage_seed() -> Seed {
    Seed::new(natural(&c("L0*q^2/4 + b/q^2")), pq().mul_coeff(&c("q")), int(0), Coeff::param(Param::L0)).unwrap()
}

fn harmonic_seed() -> Seed {
    Seed::new(natural(&c("L0*q^2")), pq(), int(0), Coeff::param(Param::L0)).unwrap()
}

fn omega() -> Coeff {
    Coeff::param(Param::Omega)
}

fn ttw_profile(m: u32, n: u32) -> Profile {
    make_profile(m, n, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), &omega()).unwrap()
}

fn flat_profile(m: u32, n: u32, a: Coeff) -> Profile {
    make_profile(m, n, &int(0), &Coeff::param(Param::L0), &int(0), &a, &omega()).unwrap()
}

#[test]
fn tagged_functions_numeric() {
    assert_eq!(tagged_trig(Tagged::S, 0.0, 3.0).unwrap(), 3.0);
    assert!((tagged_trig(Tagged::S, 1.0, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
    assert!(tagged_trig(Tagged::C, 1.0, FRAC_PI_2).unwrap().abs() < 1e-15);
    let s = tagged_trig(Tagged::S, -4.0, 1.0).unwrap();
    assert!((s - 2f64.sinh() / 2.0).abs() < 1e-15);
    assert!((s - 1.813_430_203_923_509_4).abs() < 1e-12);
    assert!(tagged_trig(Tagged::T, 1.0, FRAC_PI_2).is_err());
    assert!((tagged_trig(Tagged::T, 0.3, 0.7).unwrap() - (0.3f64.sqrt() * 0.7).tan() / 0.3f64.sqrt()).abs() < 1e-14);
}

#[test]
fn tagged_functions_symbolic() {
    assert_eq!(tagged_symbolic(Tagged::S, &int(4), &int(1), EXT).unwrap(), c("sin(2*u)/2"));
    assert_eq!(tagged_symbolic(Tagged::C, &int(-1), &int(3), EXT).unwrap(), c("cosh(3*u)"));
    assert_eq!(tagged_symbolic(Tagged::T, &int(0), &int(2), EXT).unwrap(), c("2*u"));
    assert!(matches!(tagged_symbolic(Tagged::S, &int(2), &int(1), EXT), Err(ExtError::Expr(ExprError::NonSquareCurvature(_)))));
}

#[test]
fn profiles_follow_the_table() {
    let p = ttw_profile(1, 1);
    assert_eq!(p.gamma, c("1/u"));
    assert_eq!(p.alpha, c("1/u^2"));
    assert!(p.beta.is_zero());
    assert_eq!(p.column, Column::Curved);

    let f = flat_profile(1, 1, Coeff::param(Param::A));
    assert_eq!(f.gamma, c("-A*u"));
    assert_eq!(f.alpha, c("A"));
    assert_eq!(f.beta, c("L0*A^2*u^2"));

    let s = make_profile(1, 1, &int(1), &Coeff::zero(), &int(1), &Coeff::one(), &omega()).unwrap();
    assert_eq!(s.gamma, c("cos(u)/sin(u)"));
    assert_eq!(s.alpha, c("1/sin(u)^2"));

    for kappa in [int(1), int(0), int(-1), rat(9, 4), int(-4)] {
        for cc in [int(1), int(2), rat(-1, 2)] {
            let p = make_profile(2, 1, &cc, &Coeff::zero(), &kappa, &Coeff::one(), &omega()).unwrap();
            assert!(p.invariant_residuals().iter().all(Coeff::is_zero));
        }
    }
    let forced = make_profile(2, 1, &int(1), &Coeff::param(Param::L0), &int(0), &Coeff::one(), &omega()).unwrap();
    assert!(forced.l0.is_zero() && forced.l0_forced);
    assert!(make_profile(1, 1, &int(0), &Coeff::zero(), &int(0), &Coeff::one(), &omega()).is_err());
    assert!(make_profile(0, 1, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), &omega()).is_err());
    assert!(make_profile(1, 1, &int(1), &Coeff::zero(), &int(3), &Coeff::one(), &omega()).is_err());
}

#[test]
fn seed_checks() {
    let t = ttw_seed();
    assert!(check_seed(&t.l, &t.g, &t.c, &t.l0).unwrap().ok);
    let h = harmonic_seed();
    assert!(check_seed(&h.l, &h.g, &h.c, &h.l0).unwrap().ok);
    let l = natural(&c("q^3"));
    let g = pq().mul_coeff(&c("q"));
    for (cc, l0) in [(int(1), Coeff::zero()), (int(0), Coeff::one()), (int(2), c("L0"))] {
        let chk = check_seed(&l, &g, &cc, &l0).unwrap();
        assert!(!chk.ok && !chk.residual.is_zero());
    }
    assert!(matches!(Seed::new(l, g, int(1), Coeff::zero()), Err(ExtError::SeedCondition { .. })));
}

#[test]
fn recursion_terms() {
    let h = harmonic_seed();
    assert_eq!(recursion_gn(&h, 1), h.g);
    assert_eq!(recursion_gn(&h, 2), pq().mul_coeff(&c("-4*L0*q")));
    let t = ttw_seed();
    let g2 = recursion_gn(&t, 2);
    assert_eq!(g2.degree(), 3);
    assert!(t.recursion_residual(&g2, 2).is_zero());
    assert!(!t.recursion_residual(&g2, 1).is_zero());
    for seed in [ttw_seed(), cage_seed(), harmonic_seed()] {
        for (k, gk) in seed.recursion(3).iter().enumerate() {
            assert!(seed.recursion_residual(gk, k as u32 + 1).is_zero());
        }
    }
}

#[test]
fn extended_hamiltonians() {
    let t = ttw_seed();
    let h = build_extended_h(&ttw_profile(2, 1), &t.l).unwrap();
    let expected = pu().pow(2).scale(&rat(1, 2)).add(&t.l.mul_coeff(&c("4/u^2")));
    assert_eq!(h, expected);

    let s = cage_seed();
    let h = build_extended_h(&flat_profile(3, 2, Coeff::one()), &s.l).unwrap();
    let k = rat(9, 4);
    let expected = pu().pow(2).scale(&rat(1, 2)).add(&s.l.scale(&k)).add(&PPoly::constant(c("L0*u^2").scale(&k)));
    assert_eq!(h, expected);

    let h = build_extended_h(&flat_profile(2, 2, Coeff::one()), &s.l).unwrap();
    assert_eq!(h.coeff(&Mom([2, 0])), c("1/2"));
}

#[test]
fn plain_first_integrals() {
    let t = ttw_seed();
    let p = ttw_profile(1, 1);
    let k = build_k(&p, &t).unwrap();
    assert_eq!(k, t.g.mul_momentum(EXT).add(&apply_xl(&t.l, &t.g).unwrap().mul_coeff(&p.gamma)));
    let p2 = make_profile(1, 1, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), &Coeff::from_int(7)).unwrap();
    assert_eq!(build_k(&p2, &t).unwrap(), k);
    for (m, n) in [(2, 1), (1, 2), (3, 1)] {
        let p = ttw_profile(m, n);
        let h = build_extended_h(&p, &t.l).unwrap();
        let k = build_k(&p, &t).unwrap();
        assert!(h.bracket(&k).unwrap().is_zero(), "({m},{n})");
    }
}

#[test]
fn closed_form_small_orders() {
    let t = ttw_seed();
    let p = ttw_profile(3, 1);
    let (p0, d0) = closed_form_pd(&p, &t, 0).unwrap();
    assert_eq!(p0, PPoly::one());
    assert!(d0.is_zero());
    let (p1, d1) = closed_form_pd(&p, &t, 1).unwrap();
    assert_eq!(p1, pu());
    assert_eq!(d1, PPoly::constant(p.gamma.scale(&int(3))));
    let (p2, d2) = closed_form_pd(&p, &t, 2).unwrap();
    let w2 = p.gamma.powu(2).scale(&int(9));
    assert_eq!(p2, pu().pow(2).add(&lambda(&t).mul_coeff(&w2)));
    assert_eq!(d2, pu().mul_coeff(&p.gamma.scale(&int(6))));
    assert!(matches!(closed_form_pd(&p, &t, 4), Err(ExtError::ClosedFormOrder { r: 4, m: 3 })));
    let single = ttw_profile(1, 2);
    let (_, d) = closed_form_pd(&single, &t, 1).unwrap();
    assert_eq!(d, PPoly::constant(single.gamma.scale(&rat(1, 4))));
}

#[test]
fn closed_form_matches_iteration() {
    for seed in [ttw_seed(), cage_seed()] {
        for n in 1..=2 {
            let gn = recursion_gn(&seed, n);
            for m in 1..=3 {
                let p = if seed.c.is_zero() { flat_profile(m, n, Coeff::one()) } else { ttw_profile(m, n) };
                let u = u_operator(&p, &seed.l).unwrap();
                let mut it = gn.clone();
                for r in 0..=m {
                    assert_eq!(it, closed_form_apply(&p, &seed, r, &gn).unwrap(), "m={m} n={n} r={r}");
                    it = u.apply(&it);
                }
            }
        }
    }
}

#[test]
fn modified_hamiltonians() {
    let t = ttw_seed();
    let p = ttw_profile(2, 1);
    let hb = build_modified_h(&p, &t.l).unwrap();
    let h = build_extended_h(&p, &t.l).unwrap();
    assert_eq!(hb.sub(&h), PPoly::constant(c("omega*u^2")));
    let zero = make_profile(2, 1, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), &Coeff::zero()).unwrap();
    assert_eq!(build_modified_h(&zero, &t.l).unwrap(), h);
    let s = cage_seed();
    let f = flat_profile(1, 1, Coeff::one());
    let d = build_modified_h(&f, &s.l).unwrap().sub(&build_extended_h(&f, &s.l).unwrap());
    assert_eq!(d, PPoly::constant(c("omega/u^2")));
}

#[test]
fn modified_first_integrals() {
    let t = ttw_seed();
    let p = ttw_profile(2, 1);
    let mk = build_modified_k(&p, &t).unwrap();
    assert_eq!(mk.k.degree(), 3);
    assert_eq!(mk.meta.branch, Parity::Even);
    assert_eq!((mk.meta.power, mk.meta.g_index), (1, 1));
    let hb = build_modified_h(&p, &t.l).unwrap();
    assert!(hb.bracket(&mk.k).unwrap().is_zero());

    let zero = make_profile(2, 1, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), &Coeff::zero()).unwrap();
    assert_eq!(build_modified_k(&zero, &t).unwrap().k, build_k(&zero, &t).unwrap());

    let s = cage_seed();
    let odd = flat_profile(1, 1, Coeff::one());
    let mk = build_modified_k(&odd, &s).unwrap();
    assert_eq!(mk.meta.branch, Parity::Odd);
    assert_eq!((mk.meta.effective_m, mk.meta.effective_n, mk.meta.power, mk.meta.g_index), (2, 2, 1, 2));
    let hb = build_modified_h(&odd, &s.l).unwrap();
    assert!(hb.bracket(&mk.k).unwrap().is_zero());
    // the odd pair is not commuting if the dispatch is skipped
    let naive = w_operator(&odd, &s.l).unwrap().apply(&s.g);
    assert!(!hb.bracket(&naive).unwrap().is_zero());
}

#[test]
fn binomial_expansion() {
    let t = ttw_seed();
    for m in [2, 4] {
        let p = ttw_profile(m, 1);
        assert_eq!(expand_modified_k(&p, &t).unwrap(), build_modified_k(&p, &t).unwrap().k);
    }
    let zero = make_profile(4, 1, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), &Coeff::zero()).unwrap();
    assert_eq!(expand_modified_k(&zero, &t).unwrap(), u_operator(&zero, &t.l).unwrap().apply_n(&t.g, 4));
    let s = cage_seed();
    let odd = flat_profile(1, 1, Coeff::one());
    assert_eq!(expand_modified_k(&odd, &s).unwrap(), build_modified_k(&odd, &s).unwrap().k);
}

#[test]
fn lemma_conditions() {
    let t = ttw_seed();
    let p = ttw_profile(2, 1);
    let inp = LemmaInputs::for_modified_extension(&p, &t).unwrap();
    let rep = check_lemma_conditions(&inp, Some(&omega())).unwrap();
    assert!(rep.all_ok, "{rep:?}");
    assert_eq!(rep.f0_value, Some(omega()));
    assert_eq!(rep.h0_value, Some(Coeff::zero()));
    assert_eq!(rep.sum_identity, Some(true));
    assert_eq!(rep.f0_matches_omega, Some(true));
    assert!(rep.xl_g_nonzero);

    let cage = cage_seed();
    let inp = LemmaInputs::for_modified_extension(&flat_profile(3, 2, Coeff::param(Param::A)), &cage).unwrap();
    assert_eq!((inp.m, inp.n), (6, 4));
    let rep = check_lemma_conditions(&inp, Some(&omega())).unwrap();
    assert!(rep.all_ok, "{rep:?}");

    let zero = make_profile(2, 1, &int(1), &Coeff::zero(), &int(0), &Coeff::one(), &Coeff::zero()).unwrap();
    let inp = LemmaInputs::for_modified_extension(&zero, &t).unwrap();
    let rep = check_lemma_conditions(&inp, None).unwrap();
    assert!(rep.all_ok);
    assert_eq!(rep.f0_value, Some(Coeff::zero()));
    assert_eq!(inp.f, zero.beta.scale(&zero.ratio_sq()));
}

#[test]
fn lemma_perturbations_are_detected() {
    let t = ttw_seed();
    let base = LemmaInputs::for_modified_extension(&ttw_profile(2, 1), &t).unwrap();
    let cases: Vec<(LemmaCondition, LemmaInputs)> = vec![
        (LemmaCondition::StructuralEquation, LemmaInputs { g: base.g.add(&pq().pow(3)), ..base.clone() }),
        (LemmaCondition::GammaOde, LemmaInputs { gamma: &base.gamma + &c("u^2"), ..base.clone() }),
        (LemmaCondition::AlphaRelation, LemmaInputs { alpha: &base.alpha + &Coeff::one(), ..base.clone() }),
        (LemmaCondition::FForm, LemmaInputs { f: &base.f + &c("u"), ..base.clone() }),
        (LemmaCondition::HForm, LemmaInputs { h: &base.h + &c("u"), ..base.clone() }),
    ];
    for (cond, inp) in cases {
        let rep = check_lemma_conditions(&inp, Some(&omega())).unwrap();
        assert!(!rep.passed(cond), "{cond:?} not detected");
        assert!(!rep.all_ok);
    }
}

fn lin(c_: Scalar, a1: Coeff, a2: Coeff) -> LinearInputs {
    LinearInputs { c: c_, a1, a2, c1: Coeff::param(Param::C1), c2: Coeff::param(Param::C2), l0: Coeff::param(Param::L0), case: None }
}

#[test]
fn linear_seed_table() {
    let r1 = solve_linear_seed(&LinearInputs { l0: Coeff::zero(), ..lin(int(1), Coeff::one(), Coeff::zero()) }).unwrap();
    assert_eq!(r1.case, LinearCase::Curved);
    assert_eq!(r1.eta, c("sin(q)"));
    assert_eq!(r1.v, c("(c1 + c2*cos(q))/sin(q)^2"));
    assert!(r1.certified);
    let r1l = solve_linear_seed(&lin(int(1), Coeff::one(), Coeff::zero())).unwrap();
    assert_eq!(r1l.v, c("(c1 + c2*cos(q))/sin(q)^2 - L0"));
    assert!(r1l.certified);

    let r2 = solve_linear_seed(&lin(int(0), Coeff::one(), Coeff::zero())).unwrap();
    assert_eq!(r2.case, LinearCase::FlatAffine);
    assert_eq!(r2.eta, c("q"));
    assert_eq!(r2.v, c("L0*q^2/4 + c1/q^2 + c2"));
    assert!(r2.certified);

    let r3 = solve_linear_seed(&lin(int(0), Coeff::zero(), Coeff::one())).unwrap();
    assert_eq!(r3.case, LinearCase::FlatConstant);
    assert_eq!(r3.eta, Coeff::one());
    assert_eq!(r3.v, c("L0*q^2 + c1*q + c2"));
    assert!(r3.certified);
}

#[test]
fn linear_seed_general_constants() {
    for (cc, a1, a2) in [
        (int(1), c("a1"), c("a2")),
        (int(4), c("a1"), c("a2")),
        (int(-1), c("a1"), c("a2")),
        (rat(1, 4), c("2"), c("-3")),
        (int(0), c("a1"), c("a2")),
        (int(0), c("3"), c("a2")),
        (int(0), Coeff::zero(), c("a2")),
    ] {
        let r = solve_linear_seed(&lin(cc.clone(), a1, a2)).unwrap();
        assert!(r.certified, "c = {cc}: {:?}", r.residuals);
    }
}

#[test]
fn linear_seed_case_flags() {
    let mut inp = lin(int(0), Coeff::one(), Coeff::zero());
    inp.case = Some(LinearCase::FlatConstant);
    assert!(matches!(solve_linear_seed(&inp), Err(ExtError::InconsistentCase(_))));
    inp.case = Some(LinearCase::FlatAffine);
    assert!(solve_linear_seed(&inp).is_ok());
    assert!(solve_linear_seed(&lin(int(2), Coeff::one(), Coeff::zero())).is_err());
}

#[test]
fn coefficient_system() {
    let v10 = c("(c1 + c2*cos(q))/sin(q)^2");
    let rep = check_e2_system(&v10, &[Coeff::zero(), c("sin(q)")], &int(1), &Coeff::zero());
    assert!(rep.ok);
    assert_eq!(rep.residuals.len(), 4);
    let rep = check_e2_system(&c("L0*q^2/4 + c1/q^2"), &[Coeff::zero(), c("q")], &int(0), &c("L0"));
    assert!(rep.ok);

    let v = c("c1*q^3 + c2/q");
    let rep = check_e2_system(&v, &[Coeff::zero(), Coeff::zero(), Coeff::one()], &int(0), &c("L0"));
    assert!(!rep.ok);
    let bottom = &rep.residuals[0];
    assert_eq!((bottom.power, bottom.block), (0, 4));
    let v1 = v.derivative(BASE);
    assert_eq!(bottom.residual, (&v1 * &v1).scale(&int(2)));
    let blocks: Vec<u8> = rep.residuals.iter().map(|r| r.block).collect();
    assert_eq!(blocks, vec![4, 4, 2, 1, 1]);
}

#[test]
fn coefficient_system_agrees_with_bracket_form() {
    let v = c("c1*q^3 + c2/q");
    let etas = [c("q^2"), c("c1"), c("1/q")];
    let rep = check_e2_system(&v, &etas, &int(2), &c("L0"));
    let g = etas.iter().enumerate().fold(PPoly::zero(), |acc, (i, e)| acc.add(&pq().pow(i as u32).mul_coeff(e)));
    let res = structural_residual(&natural(&v), &g, &int(2), &c("L0"), 1).unwrap();
    for r in &rep.residuals {
        assert_eq!(r.residual, res.coeff(&Mom([r.power as u16, 0])), "power {}", r.power);
    }
    assert_eq!(res.degree() as usize, rep.residuals.len() - 1);
}
