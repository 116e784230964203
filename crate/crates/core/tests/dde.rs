use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nsym_core::dde::{exp_substitute, i_pi, rescale, transform_expr, transform_system, traveling_dde, AxisMap, ConjRule, DdeError};
use nsym_core::expr::Bindings;
use nsym_core::numeric::{evaluate_residual, Axis, SolutionAnsatz};
use nsym_core::reduction::{apply_reduction, compare_canonical, find_entry, ReducedOde};
use nsym_core::{parse_expression, parse_system, EquationSystem, Expr};

const NLS: &str = include_str!("../data/nls.nsym");
const MKDV: &str = include_str!("../data/mkdv.nsym");

fn parse_in(sys: &EquationSystem, s: &str) -> Expr {
    parse_expression(s, &sys.scope).unwrap()
}

#[test]
fn nls_becomes_a_dde() {
    let sys = parse_system(NLS).unwrap();
    let out = exp_substitute(&sys, &[0]).unwrap();
    let want = parse_in(&sys, "i*D[q,t] + exp(-2*x)*(D[q,x,x] - D[q,x]) + 2*q^2*conj(q)@(x + i*pi, t)");
    assert_eq!(out.equations[0].expr, want, "{}", out.to_text());
    assert!(!out.has_reflections());
}

#[test]
fn mkdv_becomes_a_dde() {
    let sys = parse_system(MKDV).unwrap();
    let out = exp_substitute(&sys, &[0, 1]).unwrap();
    let want = parse_in(
        &sys,
        "exp(-t)*D[u,t] + exp(-x)*u*u@(x + i*pi, t + i*pi)*D[u,x] + exp(-3*x)*(D[u,x,x,x] - 3*D[u,x,x] + 2*D[u,x])",
    );
    assert_eq!(out.equations[0].expr, want, "{}", out.to_text());
}

#[test]
fn local_equation_gets_no_shifts() {
    let sys = parse_system("vars x, t; deps u; eq heat: D[u,t] - D[u,x,x] = 0;").unwrap();
    let out = exp_substitute(&sys, &[0]).unwrap();
    assert_eq!(out.equations[0].expr, parse_in(&sys, "D[u,t] - exp(-2*x)*(D[u,x,x] - D[u,x])"));
}

#[test]
fn rescaled_nls_dde() {
    let sys = parse_system(NLS).unwrap();
    let dde = exp_substitute(&sys, &[0]).unwrap();
    let out = rescale(&dde, &[Some(i_pi()), None], ConjRule::Formal).unwrap();
    let want = parse_in(&sys, "i*D[q,t] + exp(-2*i*pi*x)*(-(1/pi^2)*D[q,x,x] + (i/pi)*D[q,x]) + 2*q^2*conj(q)@(x + 1, t)");
    assert_eq!(out.equations[0].expr, want, "{}", out.to_text());
}

fn traveling_ode() -> ReducedOde {
    let e = find_entry("mkdv-traveling-nonlocal").unwrap();
    apply_reduction(&e.system, &e.spec).unwrap().remove(0)
}

#[test]
fn traveling_wave_dde() {
    let ode = traveling_ode();
    let dde = traveling_dde(&ode).unwrap();
    let want = parse_expression(
        "b^3*exp(-2*y)*(D[v,y,y,y] - 3*D[v,y,y] + 2*D[v,y]) + (b*v*v@(y + i*pi) - a)*D[v,y]",
        &ode.scope,
    )
    .unwrap();
    assert!(compare_canonical(&dde, &want, &[]), "{}", dde.to_text());
}

#[test]
fn rescaled_traveling_wave_dde() {
    let ode = traveling_ode();
    let dde = traveling_dde(&ode).unwrap();
    let e = transform_expr(&dde.expr, &[AxisMap::Scale(i_pi())], ConjRule::Formal).unwrap();
    let got = ReducedOde::new(ode.scope.clone(), e);
    let want = parse_expression(
        "b^3*exp(-2*i*pi*y)*(-(1/pi^2)*D[v,y,y,y] + (3*i/pi)*D[v,y,y] + 2*D[v,y]) + (b*v*v@(y + 1) - a)*D[v,y]",
        &ode.scope,
    )
    .unwrap();
    assert!(compare_canonical(&got, &want, &[]), "{}", got.to_text());
}

#[test]
fn degenerate_traveling_wave_has_no_shift() {
    let ode = traveling_ode();
    let flat = ode.expr.substitute(&Bindings::new().param("b", Expr::zero())).unwrap();
    let dde = traveling_dde(&ReducedOde::new(ode.scope.clone(), flat)).unwrap();
    assert!(dde.expr.jets().iter().all(|j| !j.has_shift() && j.mask == 0));
    assert!(!dde.expr.is_zero());
}

#[test]
fn unit_scale_is_the_identity() {
    let sys = parse_system(NLS).unwrap();
    let dde = exp_substitute(&sys, &[0]).unwrap();
    let same = rescale(&dde, &[Some(Expr::one()), Some(Expr::one())], ConjRule::Formal).unwrap();
    assert_eq!(same.equations, dde.equations);
}

#[test]
fn zero_scale_is_rejected() {
    let sys = parse_system(NLS).unwrap();
    assert_eq!(rescale(&sys, &[Some(Expr::zero()), None], ConjRule::Formal).unwrap_err(), DdeError::ZeroScale(0));
}

#[test]
fn two_steps_equal_the_direct_map() {
    for src in [NLS, MKDV] {
        let sys = parse_system(src).unwrap();
        for rule in [ConjRule::Formal, ConjRule::Schwarz] {
            let two = rescale(&exp_substitute(&sys, &[0]).unwrap(), &[Some(i_pi()), None], rule).unwrap();
            let direct = transform_system(&sys, &[AxisMap::Exp(i_pi()), AxisMap::Identity], rule).unwrap();
            assert_eq!(two.equations, direct.equations, "{rule:?}");
        }
    }
}

#[test]
fn imaginary_space_makes_nls_local() {
    let sys = parse_system(NLS).unwrap();
    let scales = [Some(Expr::i()), Some(Expr::int(-1))];
    let local = rescale(&sys, &scales, ConjRule::Schwarz).unwrap();
    assert!(!local.has_reflections(), "{}", local.to_text());
    assert!(rescale(&sys, &scales, ConjRule::Formal).unwrap().has_reflections());
}

/// Largest relative gap between the transformed residual at `x̂` and the
/// source residual at the mapped point, for an arbitrary analytic field.
fn conjugacy_gap(
    sys: &EquationSystem,
    maps: &[AxisMap],
    rule: ConjRule,
    field: &str,
    sample: impl Fn(&mut ChaCha8Rng) -> Vec<Complex64>,
    to_source: impl Fn(&[Complex64]) -> Vec<Complex64>,
) -> f64 {
    let out = transform_system(sys, maps, rule).unwrap();
    let f = parse_in(sys, field);
    let dim = sys.scope.dim();
    let moved = (0..dim).fold(Bindings::new(), |b, i| {
        let img = match &maps[i] {
            AxisMap::Identity => Expr::var(i),
            AxisMap::Scale(s) => s.mul(&Expr::var(i)),
            AxisMap::Exp(s) => nsym_core::expr::exp(&s.mul(&Expr::var(i))),
        };
        b.var(i, img)
    });
    let g = f.substitute(&moved).unwrap();
    let domain = vec![Axis::real(-1.0, 1.0); dim];
    let src = SolutionAnsatz::new(sys.scope.clone(), vec![f], domain.clone());
    let dst = SolutionAnsatz::new(sys.scope.clone(), vec![g], domain);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for _ in 0..64 {
        let p = sample(&mut rng);
        let a = evaluate_residual(&out.equations[0].expr, &dst, &p).unwrap().unwrap();
        let b = evaluate_residual(&sys.equations[0].expr, &src, &to_source(&p)).unwrap().unwrap();
        worst = worst.max((a - b).norm() / (1.0 + b.norm()));
    }
    worst
}

fn complex_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.4..0.4))).collect()
}

#[test]
fn nls_dde_is_numerically_conjugate() {
    let sys = parse_system(NLS).unwrap();
    let gap = conjugacy_gap(
        &sys,
        &[AxisMap::Exp(Expr::one()), AxisMap::Identity],
        ConjRule::Formal,
        "exp(i*(x/2 + t/3))*(1 + x^2/5)",
        |r| complex_point(r, 2),
        |p| vec![p[0].exp(), p[1]],
    );
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn mkdv_dde_is_numerically_conjugate() {
    let sys = parse_system(MKDV).unwrap();
    let gap = conjugacy_gap(
        &sys,
        &[AxisMap::Exp(Expr::one()), AxisMap::Exp(Expr::one())],
        ConjRule::Formal,
        "sin(x) + x^2*t/3 + cos(t)",
        |r| complex_point(r, 2),
        |p| vec![p[0].exp(), p[1].exp()],
    );
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn local_map_is_numerically_conjugate() {
    let sys = parse_system(NLS).unwrap();
    let gap = conjugacy_gap(
        &sys,
        &[AxisMap::Scale(Expr::i()), AxisMap::Scale(Expr::int(-1))],
        ConjRule::Schwarz,
        "exp(i*(x/2 + t/3))*(1 + x^2/5)",
        |r| complex_point(r, 2),
        |p| vec![Complex64::i() * p[0], -p[1]],
    );
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn traveling_round_trip() {
    let ode = traveling_ode();
    let raw = transform_expr(&ode.expr, &[AxisMap::Exp(Expr::one())], ConjRule::Formal).unwrap();
    let field = parse_expression("sin(y) + y^2/3", &ode.scope).unwrap();
    let moved = field.substitute(&Bindings::new().var(0, nsym_core::expr::exp(&Expr::var(0)))).unwrap();
    let params = |s: SolutionAnsatz| s.param("a", 0.7).param("b", 1.3);
    let src = params(SolutionAnsatz::new(ode.scope.clone(), vec![field], vec![Axis::real(-1.0, 1.0)]));
    let dst = params(SolutionAnsatz::new(ode.scope.clone(), vec![moved], vec![Axis::real(-1.0, 1.0)]));
    for k in 0..20 {
        let y = Complex64::new(-1.0 + 0.1 * k as f64, 0.0);
        let a = evaluate_residual(&raw, &dst, &[y]).unwrap().unwrap();
        let b = evaluate_residual(&ode.expr, &src, &[y.exp()]).unwrap().unwrap();
        assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()), "{a} vs {b}");
    }
}
