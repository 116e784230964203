use super::*;
use crate::expr::Jet;

fn nls_scope() -> Scope {
    Scope::new(&["x", "t"], &["q"])
}

#[test]
fn nonlocal_nls_left_hand_side() {
    let e = parse_expression("i*D[q,t] + D[q,x,x] + 2*q^2*conj(q@(-x,t))", &nls_scope()).unwrap();
    let qt = Expr::jet(Jet::new(0, vec![0, 1]));
    let qxx = Expr::jet(Jet::new(0, vec![2, 0]));
    let q = Expr::jet(Jet::base(0, 2));
    let qr = Expr::jet(Jet::base(0, 2).with_mask(1).with_conj(true));
    let want = Expr::i() * qt + qxx + (q.pow(2).unwrap() * qr).scale(&crate::GaussRat::int(2));
    assert_eq!(e, want);
}

#[test]
fn mkdv_with_double_reflection() {
    let scope = Scope::new(&["x", "t"], &["u"]);
    let e = parse_expression("D[u,t] + u*u@(-x,-t)*D[u,x] + D[u,x,x,x]", &scope).unwrap();
    assert!(e.jets().iter().any(|j| j.mask == 0b11 && j.order() == 0));
    assert!(parse_expression("0", &scope).unwrap().is_zero());
}

#[test]
fn derivative_of_reflected_function_is_chain_ruled() {
    let s = nls_scope();
    let a = parse_expression("D[q@(-x,t), x]", &s).unwrap();
    let b = parse_expression("-D[q,x]@(-x,t)", &s).unwrap();
    assert_eq!(a, b);
}

#[test]
fn shifts_and_fractional_powers() {
    let s = nls_scope();
    let e = parse_expression("q@(x + i*pi, t)", &s).unwrap();
    let j = &e.jets()[0];
    assert_eq!(j.mask, 0);
    assert!(j.has_shift());
    assert_eq!(parse_expression("q@shift(x + i*pi, t)", &s).unwrap(), e);
    let w = parse_expression("w^(-1/2) * w", &s).unwrap();
    assert_eq!(w, parse_expression("sqrt(w)", &s).unwrap());
    assert_eq!(parse_expression("0.25", &s).unwrap(), Expr::ratio(1, 4));
}

#[test]
fn errors_carry_spans() {
    let s = nls_scope();
    for bad in ["q +", "foo(x)", "D[q, z]", "q@(x)", "2 $ 3", "x^y", "q@(2*x, t)", "(x"] {
        let err = parse_expression(bad, &s).unwrap_err();
        assert!(err.span.end <= bad.len(), "{bad}: {err:?}");
        assert!(err.span.begin <= err.span.end);
    }
    let err = parse_expression("foo(x)", &s).unwrap_err();
    assert!(err.message.contains("unknown function"));
}

#[test]
fn generators() {
    let s = nls_scope();
    let g = parse_generator("gen { xi_x: 0; xi_t: 0; phi_q: i*q; }", &s).unwrap();
    assert_eq!(g.phi[0], parse_expression("i*q", &s).unwrap());
    let g = parse_generator("gen scaling { xi_x: -x; xi_t: -2*t; phi_q: q; }", &s).unwrap();
    assert_eq!(g.name.as_deref(), Some("scaling"));
    assert!(parse_generator("gen { xi_x: 1; xi_t: 0; phi_q: 0; }", &s).is_ok());
    let e = parse_generator("gen { xi_x: D[q,x]; xi_t: 0; phi_q: 0; }", &s).unwrap_err();
    assert!(e.message.contains("point symmetries"));
    assert!(parse_generator("gen { xi_x: 1; phi_q: 0; }", &s).is_err());
}

#[test]
fn systems() {
    let src = "vars x, t; deps q;\neq e1: i*D[q,t] + D[q,x,x] + 2*q^2*conj(q@(-x,t)) = 0;\nsolve D[q,t] from e1;\n";
    let sys = parse_system(src).unwrap();
    assert_eq!(sys.leading.len(), 1);
    let rhs = parse_expression("i*(D[q,x,x] + 2*q^2*conj(q@(-x,t)))", &sys.scope).unwrap();
    assert_eq!(sys.leading[0].rhs, rhs);
    assert!(parse_system("").unwrap_err().message.contains("empty"));
    let nonlinear = "vars x, t; deps q;\neq e1: D[q,t]^2 + q = 0;\nsolve D[q,t] from e1;\n";
    assert!(parse_system(nonlinear).unwrap_err().message.contains("nonlinearly"));
    let absent = "vars x, t; deps q;\neq e1: D[q,x] + q = 0;\nsolve D[q,t] from e1;\n";
    assert!(parse_system(absent).unwrap_err().message.contains("does not occur"));
}

#[test]
fn printing_round_trips() {
    let s = nls_scope();
    for text in [
        "i*D[q,t] + D[q,x,x] + 2*q^2*conj(q@(-x,t))",
        "exp(-2*x)*(D[q,x,x] - D[q,x]) + conj(q@(x + i*pi, t))",
        "(1/2 + 3*i)*x^(-2)*sqrt(w) - sn(x*c, 1/4)^3/(1 + t)",
        "cbrt(t)^(-1)*x + log(a) - abs(b)*pi",
    ] {
        let e = parse_expression(text, &s).unwrap();
        let printed = e.to_text(&s);
        let again = parse_expression(&printed, &s).unwrap();
        assert_eq!(again, e, "{text} -> {printed}");
    }
}
