use crate::poly::{Polynomial, Rational, Var};
use crate::scheme::PolyOdeSystem;

use super::{c, sym, CaseError};

/// `ẋ = α x (1 − y)`, `ẏ = y (x − 1)` with the hand-written Kahan scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct LotkaVolterra {
    pub system: PolyOdeSystem,
    /// `h`-cleared equations `x̃ − x − (hα/2)(x(1−ỹ) + x̃(1−y))` and
    /// `ỹ − y − (h/2)(y(x̃−1) + ỹ(x−1))`.
    pub expected: Vec<Polynomial>,
}

/// With `alpha = None` the coefficient stays symbolic as `alpha`.
pub fn lotka_volterra(alpha: Option<Rational>) -> Result<LotkaVolterra, CaseError> {
    let a = match alpha {
        Some(v) if num_traits::Zero::is_zero(&v) => return Err(CaseError::ZeroParameter("alpha")),
        Some(v) => c(v),
        None => sym("alpha"),
    };
    let (x, y) = (Polynomial::state(1, 0), Polynomial::state(2, 0));
    let (xt, yt) = (Polynomial::state(1, 1), Polynomial::state(2, 1));
    let one = Polynomial::one();
    let system = PolyOdeSystem::new(
        1,
        vec![&a * &(&x * &(&one - &y)), &y * &(&x - &one)],
    )?;
    let h = Polynomial::var(Var::param("h"));
    let half = Polynomial::constant(crate::poly::q(1, 2));
    let e1 = &xt - &x - &h * &half * &a * &(&x * &(&one - &yt) + &xt * &(&one - &y));
    let e2 = &yt - &y - &h * &half * &(&y * &(&xt - &one) + &yt * &(&x - &one));
    Ok(LotkaVolterra {
        system,
        expected: vec![e1, e2],
    })
}
