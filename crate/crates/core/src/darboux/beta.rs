//! The β-family of maps for `V = q q̈²`, through order g².

use crate::algebra::{int, rat, GSeries, PhasePoly, Rational};

fn t(c: Rational, q: u32, qd: u32, w: i32) -> PhasePoly {
    PhasePoly::term(c, q, qd, w)
}

/// `mₙ(β)` for n = 1, 2, where `x = q − Σ gⁿ mₙ`.
pub fn beta_family_m(beta: &Rational, n: usize) -> PhasePoly {
    let b = beta.clone();
    match n {
        1 => -&(&t(b.clone(), 2, 0, 2) + &t(int(2) * &b + int(4), 0, 2, 0)),
        2 => {
            let c3 = int(-2) * &b - rat(50, 3);
            let c1 = int(-32) - int(2) * &b * &b - int(24) * &b;
            -&(&t(c3, 3, 0, 4) + &t(c1, 1, 2, 2))
        }
        _ => panic!("beta family is tabulated through order 2"),
    }
}

/// `ẋ(q, q̇)` of the family, truncated at `order ≤ 2`.
pub fn beta_family_velocity(beta: &Rational, order: usize) -> GSeries {
    let b = beta.clone();
    let c1 = t(int(-2) * (&b + int(4)), 1, 1, 2);
    let c2 = &t(int(4) * &b * &b + int(22) * &b - int(26), 2, 1, 4)
        + &t(int(-2) * (&b * &b + int(4) * &b), 0, 3, 2);
    let mut coeffs = vec![PhasePoly::qdot(), c1, c2];
    coeffs.truncate(order + 1);
    GSeries::from_coeffs(coeffs, order)
}
