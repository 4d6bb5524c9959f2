use muspec::evolution::{Evolution, LinearSystem, Matrix, ScaledMatrix, WeightedSystem};
use muspec::exprparse::{parse, BinOp, Expr, ExprError, Func};
use muspec::rates::{symbolic_compare, GrowthRate, RelationProfile, TimeDomain, CATALOG_RATES};
use muspec::relations::{
    check_almost, check_faster, check_faster_dual, classify_pair, Certificate, Direction, Outcome, RelationParams,
    RelationVerdict,
};
use muspec::scalar::ExtReal;
use muspec::spectrum::{compute_spectrum, dichotomy_from_report, growth_from_report, EstimatorParams, SpectrumMode};
use muspec::theorems::{generate_quotient_system, Fixture, Harness, TheoremParams, Verifier};
use proptest::prelude::*;

use TimeDomain::{Continuous as C, Discrete as D};

const COCYCLE_TOL: f64 = 1e-9;
const INVERSE_TOL: f64 = 1e-9;
const WEIGHT_TOL: f64 = 1e-12;
const REEVAL_TOL: f64 = 1e-9;
const F32_TOL: f64 = 1e-3;

fn leaf() -> impl Strategy<Value = Expr<f64>> {
    prop_oneof![
        (0u32..20).prop_map(|n| Expr::constant(n as f64)),
        (0.0f64..100.0).prop_map(Expr::constant),
        Just(Expr::var('t')),
    ]
}

fn expr() -> impl Strategy<Value = Expr<f64>> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
        let unary = prop_oneof![
            Just(Func::Exp),
            Just(Func::Log),
            Just(Func::Abs),
            Just(Func::Sgn),
            Just(Func::Sqrt)
        ];
        let binary = prop_oneof![Just(Func::Min), Just(Func::Max)];
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::binary(o, a, b)),
            (unary, inner.clone()).prop_map(|(f, a)| Expr::call(f, vec![a])),
            (binary, inner.clone(), inner).prop_map(|(f, a, b)| Expr::call(f, vec![a, b])),
        ]
    })
}

fn catalog(domain: TimeDomain) -> Vec<GrowthRate<f64>> {
    CATALOG_RATES.iter().filter_map(|n| GrowthRate::catalog(n, domain).ok()).collect()
}

/// The catalog plus two rescaled rates.
fn extended_catalog(domain: TimeDomain) -> Vec<GrowthRate<f64>> {
    let mut v = catalog(domain);
    v.push(GrowthRate::power_exp(1.0, 3.0, domain).unwrap());
    v.push(GrowthRate::power_exp(2.0, 0.5, domain).unwrap());
    v
}

fn power_grid(lambdas: &[f64], domain: TimeDomain) -> Vec<GrowthRate<f64>> {
    let mut v = vec![GrowthRate::polynomial(domain)];
    for p in [1.0, 2.0, 3.0] {
        for &l in lambdas {
            v.push(GrowthRate::power_exp(p, l, domain).unwrap());
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_stable(e in expr()) {
        let first: Expr<f64> = parse(&e.to_string()).unwrap();
        let second: Expr<f64> = parse(&first.to_string()).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(first.to_string(), second.to_string());
    }

    #[test]
    fn product_binds_tighter_than_sum(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0) {
        let flat: Expr<f64> = parse(&format!("({a})+({b})*({c})")).unwrap();
        let grouped: Expr<f64> = parse(&format!("({a})+(({b})*({c}))")).unwrap();
        prop_assert_eq!(flat.eval(0.0).unwrap().to_bits(), grouped.eval(0.0).unwrap().to_bits());
    }

    #[test]
    fn log_quotient_signs(name in prop::sample::select(CATALOG_RATES.to_vec()), n in -300i32..300, len in 0i32..300) {
        for domain in [D, C] {
            let Ok(r) = GrowthRate::<f64>::catalog(name, domain) else { continue };
            let (n, k) = (n as f64, (n + len) as f64);
            let fwd = r.log_quotient(k, n).unwrap().value;
            let back = r.log_quotient(n, k).unwrap().value;
            prop_assert!(fwd >= 0.0);
            prop_assert_eq!(fwd, -back);
        }
    }

    #[test]
    fn discrete_cocycle(idx in 0usize..3, k in -60i32..60, m in -60i32..60, n in -60i32..60) {
        let sys = &discrete_systems()[idx];
        let (k, m, n) = (k as f64, m as f64, n as f64);
        let lhs = sys.propagate(k, m).unwrap().matmul(&sys.propagate(m, n).unwrap());
        prop_assert!(lhs.relative_distance(&sys.propagate(k, n).unwrap()) <= COCYCLE_TOL);
    }

    #[test]
    fn continuous_cocycle(name in prop::sample::select(vec!["abs2t", "inv1pt", "sq3t2"]), k in -8i32..8, m in -8i32..8, n in -8i32..8) {
        let sys = Fixture::catalog(name).unwrap().system;
        let (k, m, n) = (k as f64 / 2.0, m as f64 / 2.0, n as f64 / 2.0);
        let lhs = sys.propagate(k, m).unwrap().matmul(&sys.propagate(m, n).unwrap());
        prop_assert!(lhs.relative_distance(&sys.propagate(k, n).unwrap()) <= COCYCLE_TOL);
    }

    #[test]
    fn propagation_is_invertible(idx in 0usize..3, k in -40i32..40, n in -40i32..40) {
        let sys = &discrete_systems()[idx];
        let (k, n) = (k as f64, n as f64);
        let round = sys.propagate(k, n).unwrap().matmul(&sys.propagate(n, k).unwrap());
        let id = ScaledMatrix::identity(sys.dimension);
        prop_assert!(round.relative_distance(&id) <= INVERSE_TOL);
    }

    #[test]
    fn weighting_divides_out(idx in 0usize..3, nu in prop::sample::select(vec!["p", "exp", "q", "c"]), gamma in -3.0f64..3.0, k in -30i32..30, n in -30i32..30) {
        let sys = &discrete_systems()[idx];
        let rate = GrowthRate::catalog(nu, D).unwrap();
        let (k, n) = (k as f64, n as f64);
        let w = WeightedSystem::new(sys, rate.clone(), gamma);
        let l = rate.log_quotient(k, n).unwrap().value;
        let recovered = w.propagate(k, n).unwrap().shift_log(gamma * l);
        let base = sys.propagate(k, n).unwrap();
        let scale = base.log_norm.abs().max((gamma * l).abs()).max(1.0);
        prop_assert!((recovered.log_norm - base.log_norm).abs() <= WEIGHT_TOL * scale);
        prop_assert_eq!(recovered.unit, base.unit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evaluation_reports_instead_of_aborting(e in expr(), x in -10.0f64..10.0) {
        match e.eval(x) {
            Ok(_) | Err(ExprError::Domain { .. }) => {}
            Err(other) => prop_assert!(false, "unexpected error {other}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weighted_spectrum_is_translated(
        nu in prop::sample::select(vec![("p", D), ("exp", D), ("q", D), ("c", D), ("c", C), ("exp", C)]),
        slopes in prop::collection::vec(-2.0f64..2.0, 1..=3),
        gamma in -2.0f64..2.0,
    ) {
        let params = EstimatorParams::default();
        let rate = GrowthRate::catalog(nu.0, nu.1).unwrap();
        let fx = generate_quotient_system(&rate, &slopes).unwrap();
        let base = compute_spectrum(&fx.system, &rate, &params).unwrap();
        let shifted = compute_spectrum(&WeightedSystem::new(&fx.system, rate.clone(), gamma), &rate, &params).unwrap();
        prop_assert_eq!(base.intervals.len(), shifted.intervals.len());
        for (b, s) in base.intervals.iter().zip(&shifted.intervals) {
            prop_assert!(b.lo.shift(-gamma).close_to(s.lo, params.tol_stab));
            prop_assert!(b.hi.shift(-gamma).close_to(s.hi, params.tol_stab));
        }
    }

    #[test]
    fn diagonal_spectra_are_ordered(
        nu in prop::sample::select(vec!["p", "exp", "q", "c"]),
        slopes in prop::collection::vec(-3.0f64..3.0, 1..=4),
    ) {
        let rate = GrowthRate::catalog(nu, D).unwrap();
        let fx = generate_quotient_system(&rate, &slopes).unwrap();
        let r = compute_spectrum(&fx.system, &rate, &EstimatorParams::default()).unwrap();
        prop_assert!(r.intervals.len() <= slopes.len());
        for w in r.intervals.windows(2) {
            prop_assert!(w[0].hi < w[1].lo);
        }
        for iv in &r.intervals {
            prop_assert!(iv.lo <= iv.hi);
        }
        let ranks: Vec<usize> = r.gaps.iter().map(|g| g.rank.unwrap()).collect();
        prop_assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(ranks.first().copied(), Some(0));
        prop_assert_eq!(ranks.last().copied(), Some(slopes.len()));
    }

    #[test]
    fn enclosure_contains_the_diagonal_spectrum(theta in 0.0f64..std::f64::consts::PI, s1 in -2.0f64..2.0, s2 in -2.0f64..2.0) {
        let (c, s) = (theta.cos(), theta.sin());
        let rot = Matrix::from_rows(&[vec![c, -s], vec![s, c]]);
        let a = rot.matmul(&Matrix::from_diagonal(&[s1.exp(), s2.exp()])).matmul(&rot.transpose());
        let rows = (0..2)
            .map(|i| (0..2).map(|j| Expr::constant(a[(i, j)])).collect())
            .collect();
        let full = LinearSystem::full(rows, D).unwrap();
        let rate = GrowthRate::exp(D);
        let params = EstimatorParams::default();
        let enc = compute_spectrum(&full, &rate, &params).unwrap();
        prop_assert_eq!(enc.mode, SpectrumMode::Enclosure);
        prop_assert!(enc.gaps.iter().all(|g| g.rank.is_none()));
        let exact = compute_spectrum(&LinearSystem::diagonal(vec![Expr::constant(s1.exp()), Expr::constant(s2.exp())], D).unwrap(), &rate, &params).unwrap();
        let lo = enc.intervals[0].lo.shift(-params.tol_stab);
        let hi = enc.intervals[enc.intervals.len() - 1].hi.shift(params.tol_stab);
        for iv in &exact.intervals {
            prop_assert!(lo <= iv.lo && iv.hi <= hi, "{:?} not in {:?}", exact.intervals, enc.intervals);
        }
    }
}

fn discrete_systems() -> Vec<LinearSystem<f64>> {
    let full = LinearSystem::full(
        vec![
            vec![parse("1.02").unwrap(), parse("0.1*sgn(k)").unwrap()],
            vec![parse("-0.1").unwrap(), parse("1 - 0.01*sgn(k)").unwrap()],
        ],
        D,
    )
    .unwrap();
    let diag = LinearSystem::diagonal(vec![parse("exp(0.3*sgn(k))").unwrap(), parse("-0.5").unwrap()], D).unwrap();
    vec![Fixture::catalog("frak_a").unwrap().system, diag, full]
}

#[test]
fn pure_quotients_have_point_spectra() {
    let params = EstimatorParams::default();
    for domain in [D, C] {
        for nu in ["p", "exp", "q", "c"] {
            let rate = GrowthRate::catalog(nu, domain).unwrap();
            for s in [-2.0, -1.0, 1.0, 2.0] {
                let fx = generate_quotient_system(&rate, &[s]).unwrap();
                let r = compute_spectrum(&fx.system, &rate, &params).unwrap();
                assert_eq!(r.intervals.len(), 1);
                let iv = r.intervals[0];
                let ok = iv.lo.close_to(ExtReal::Finite(s), params.tol_stab) && iv.hi.close_to(ExtReal::Finite(s), params.tol_stab);
                assert!(ok, "{nu} {domain} slope {s}: {iv:?}");
            }
        }
    }
}

#[test]
fn closed_forms_match_propagation() {
    let times: Vec<f64> = (-6..=6).map(|i| i as f64 * 1.5).collect();
    let int_times: Vec<f64> = (-9..=9).map(|i| i as f64).collect();
    for fx in Harness::standard().fixtures {
        let (ts, tol) = match fx.time_domain() {
            D => (&int_times, 1e-12),
            C => (&times, 1e-6),
        };
        let err = fx.closed_form_error(ts).unwrap().unwrap();
        // Discrete errors scale with the size of the logs involved.
        let scale = if fx.time_domain() == D { 1e3 } else { 1.0 };
        assert!(err <= tol * scale, "{}: {err:e}", fx.name);
    }
}

#[test]
fn strong_dichotomy_reading_is_consistent() {
    let verifier = Verifier::new(TheoremParams::default());
    let h = Harness::standard();
    for fx in &h.fixtures {
        for rate in h.rates(fx.time_domain()) {
            let r = verifier.spectrum(fx, rate).unwrap();
            let strong = dichotomy_from_report(&r).admits() && growth_from_report(&r).holds();
            let finite = r.intervals.iter().all(|i| i.lo.is_finite() && i.hi.is_finite());
            let zero = ExtReal::Finite(0.0);
            let in_gap = r.gaps.iter().any(|g| g.contains(zero));
            let near_edge = r
                .intervals
                .iter()
                .flat_map(|i| [i.lo, i.hi])
                .any(|e| e.close_to(zero, r.params.tol_stab));
            let expect = r.converged && finite && in_gap && !near_edge;
            assert_eq!(strong, expect, "{} under {}", fx.name, rate.label());
        }
    }
}

fn status_pair(v: &RelationVerdict<f64>) -> &'static str {
    v.status()
}

#[test]
fn primal_and_dual_faster_checks_agree() {
    let params = RelationParams::default();
    for domain in [D, C] {
        let rates = extended_catalog(domain);
        for a in &rates {
            for b in &rates {
                let p = check_faster(a, b, &params).unwrap();
                let d = check_faster_dual(a, b, &params).unwrap();
                assert_eq!(status_pair(&p), status_pair(&d), "{domain}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn faster_implies_weakly_implies_almost() {
    let params = RelationParams::default();
    let rates = power_grid(&[0.5, 1.0, 2.0], D);
    for a in &rates {
        for b in &rates {
            let prof = classify_pair(a, b, &params).unwrap();
            if prof.faster.forward.holds() {
                assert!(prof.weakly_faster.forward.holds(), "{a} >> {b} but not weakly");
            }
            if prof.weakly_faster.forward.holds() {
                assert!(!prof.almost_faster.forward.fails(), "{a} weakly faster than {b} but not almost");
            }
        }
    }
}

#[test]
fn symbolic_and_numeric_verdicts_agree() {
    let params = RelationParams::default();
    let rates = power_grid(&[0.5, 1.0, 2.0, 3.0], D);
    for a in &rates {
        for b in &rates {
            let sym = symbolic_compare(a, b).unwrap();
            let num = classify_pair(a, b, &params).unwrap();
            let pairs: [(&str, &RelationVerdict<f64>, bool); 8] = [
                ("faster", &num.faster.forward, sym.faster.forward),
                ("weakly_faster", &num.weakly_faster.forward, sym.weakly_faster.forward),
                ("almost_faster", &num.almost_faster.forward, sym.almost_faster.forward),
                ("almost_slower", &num.almost_slower.forward, sym.almost_slower.forward),
                ("weakly_equivalent", &num.weakly_equivalent, sym.weakly_equivalent),
                ("equivalent", &num.equivalent, sym.equivalent),
                ("chain_order", &num.chain_order.forward, sym.chain_order.forward),
                ("chain_order back", &num.chain_order.backward, sym.chain_order.backward),
            ];
            for (name, v, expected) in pairs {
                if let Some(got) = v.decided() {
                    assert_eq!(got, expected, "{name}({a}, {b})");
                }
            }
            assert!(num.faster.forward.decided().is_some(), "faster({a}, {b}) undecided");
            assert!(num.weakly_faster.forward.decided().is_some(), "weakly_faster({a}, {b}) undecided");
        }
    }
}

#[test]
fn almost_slower_transfers_faster() {
    let params = RelationParams::default();
    let rates = extended_catalog(D);
    for omega in &rates {
        for mu1 in &rates {
            if !check_faster(mu1, omega, &params).unwrap().holds() {
                continue;
            }
            for mu2 in &rates {
                if check_almost(mu2, mu1, Direction::Slower, &params).unwrap().holds() {
                    let v = check_faster(mu2, omega, &params).unwrap();
                    assert!(v.holds(), "{omega} << {mu1}, {mu1} slower than {mu2}, but {omega} << {mu2} is {}", v.status());
                }
            }
        }
    }
}

#[test]
fn equivalent_rates_share_faster_families() {
    let params = RelationParams::default();
    for domain in [D, C] {
        let rates = extended_catalog(domain);
        for mu1 in &rates {
            for mu2 in &rates {
                if !classify_pair(mu1, mu2, &params).unwrap().equivalent.holds() {
                    continue;
                }
                for omega in &rates {
                    let a = check_faster(omega, mu1, &params).unwrap();
                    let b = check_faster(omega, mu2, &params).unwrap();
                    assert_eq!(a.status(), b.status(), "{omega} over {mu1} / {mu2}");
                    let a = check_faster(mu1, omega, &params).unwrap();
                    let b = check_faster(mu2, omega, &params).unwrap();
                    assert_eq!(a.status(), b.status(), "{mu1} / {mu2} over {omega}");
                }
            }
        }
    }
}

#[test]
fn equivalences_are_equivalence_relations() {
    let params = RelationParams::default();
    for domain in [D, C] {
        let rates = extended_catalog(domain);
        let n = rates.len();
        let profiles: Vec<Vec<RelationProfile<RelationVerdict<f64>>>> =
            rates.iter().map(|a| rates.iter().map(|b| classify_pair(a, b, &params).unwrap()).collect()).collect();
        type Pick = fn(&RelationProfile<RelationVerdict<f64>>) -> &RelationVerdict<f64>;
        let relations: [(&str, Pick); 2] = [("~", |p| &p.weakly_equivalent), ("≈", |p| &p.equivalent)];
        for (name, rel) in relations {
            let holds = |i: usize, j: usize| rel(&profiles[i][j]).holds();
            for i in 0..n {
                assert!(holds(i, i), "{} {name} itself", rates[i]);
                for j in 0..n {
                    assert_eq!(rel(&profiles[i][j]).status(), rel(&profiles[j][i]).status(), "{name} symmetry {i} {j}");
                    for k in 0..n {
                        if holds(i, j) && holds(j, k) {
                            assert!(holds(i, k), "{name} transitivity {} {} {}", rates[i], rates[j], rates[k]);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn glued_rate_is_weakly_equivalent_to_cubic() {
    let params = RelationParams::default();
    let glued = GrowthRate::<f64>::catalog("glued_c_p", C).unwrap();
    let cubic = GrowthRate::cubic(C);
    assert!(classify_pair(&glued, &cubic, &params).unwrap().weakly_equivalent.holds());
}

/// `max_{n <= k} (L_ω(k, n) - ε L_μ(k, n))` over the integer window, by
/// enumerating pairs.
fn brute_sup(mu: &GrowthRate<f64>, omega: &GrowthRate<f64>, eps: f64, n_max: i64) -> f64 {
    let lm: Vec<f64> = (-n_max..=n_max).map(|t| mu.log_rate(t as f64).unwrap()).collect();
    let lw: Vec<f64> = (-n_max..=n_max).map(|t| omega.log_rate(t as f64).unwrap()).collect();
    let mut best = 0.0f64;
    for n in 0..lm.len() {
        for k in n..lm.len() {
            best = best.max((lw[k] - lw[n]) - eps * (lm[k] - lm[n]));
        }
    }
    best
}

#[test]
fn faster_certificates_and_witnesses_reevaluate() {
    let params = RelationParams::default();
    let n_max = *params.schedule.last().unwrap() as i64;
    let rates = catalog(D);
    for mu in &rates {
        for omega in &rates {
            let v = check_faster(mu, omega, &params).unwrap();
            match &v.outcome {
                Outcome::Holds(Certificate::Faster { envelopes }) => {
                    for &(eps, c) in envelopes {
                        let direct = brute_sup(mu, omega, eps, n_max);
                        assert!((direct - c).abs() <= REEVAL_TOL * c.abs().max(1.0), "{mu} >> {omega} at {eps}: {direct} vs {c}");
                    }
                }
                Outcome::Fails(w) => {
                    let eps: f64 = w.parameter.trim_start_matches("epsilon=").parse().unwrap();
                    for p in &w.pairs {
                        let direct = (omega.log_rate(p.k).unwrap() - omega.log_rate(p.n).unwrap())
                            - eps * (mu.log_rate(p.k).unwrap() - mu.log_rate(p.n).unwrap());
                        assert!((direct - p.value).abs() <= REEVAL_TOL * p.value.abs().max(1.0));
                    }
                    let first = w.pairs.first().unwrap().value;
                    let last = w.pairs.last().unwrap().value;
                    assert!(last - first >= params.tol_stab, "{mu} vs {omega}: witness does not grow");
                }
                other => panic!("{mu} >> {omega} undecided: {other:?}"),
            }
        }
    }
}

#[test]
fn corollaries_hold_on_the_grid() {
    let verifier = Verifier::new(TheoremParams::default());
    let h = Harness::standard();
    for fx in &h.fixtures {
        let rates = h.rates(fx.time_domain());
        for mu in rates {
            for omega in rates {
                if mu == omega || !verifier.faster(mu, omega).unwrap().holds() {
                    continue;
                }
                let s_mu = verifier.spectrum(fx, mu).unwrap();
                let s_omega = verifier.spectrum(fx, omega).unwrap();
                if dichotomy_from_report(&s_mu).admits() {
                    assert!(growth_from_report(&s_omega).fails(), "{}: dichotomy for {mu} but growth for {omega}", fx.name);
                }
                if growth_from_report(&s_omega).holds() {
                    assert!(!dichotomy_from_report(&s_mu).admits(), "{}: growth for {omega} and dichotomy for {mu}", fx.name);
                }
            }
        }
    }
}

#[test]
fn single_and_double_precision_agree() {
    let params = EstimatorParams::default();
    for (src, nu, domain) in [("exp(abs(2*k+1))", "q", D), ("2*abs(t)", "q", C), ("1/(1+abs(t))", "p", C)] {
        let s64 = LinearSystem::<f64>::scalar(parse(src).unwrap(), domain);
        let s32 = LinearSystem::<f32>::scalar(parse(src).unwrap(), domain);
        let r64 = compute_spectrum(&s64, &GrowthRate::<f64>::catalog(nu, domain).unwrap(), &params).unwrap();
        let r32 = compute_spectrum(&s32, &GrowthRate::catalog(nu, domain).unwrap(), &params).unwrap();
        assert_eq!(r64.intervals.len(), r32.intervals.len());
        for (a, b) in r64.intervals.iter().zip(&r32.intervals) {
            assert!(a.lo.close_to(ExtReal::from_value(b.lo.to_f64()), F32_TOL), "{src}: {a:?} vs {b:?}");
            assert!(a.hi.close_to(ExtReal::from_value(b.hi.to_f64()), F32_TOL), "{src}: {a:?} vs {b:?}");
        }
    }
}
