use serde::Serialize;

use super::TorusError;
use crate::convex::find_integer_relation;

/// Default bound for the independence search.
pub const INDEPENDENCE_BOUND: u32 = 1000;

/// Slopes `(alpha, beta)` of the plane `z = alpha x + beta y`, with
/// `1, alpha, beta` checked for small integer relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrrationalPair {
    pub alpha: f64,
    pub beta: f64,
    /// No relation `k0 + k1 alpha + k2 beta = 0` with `|k_i|` up to this bound;
    /// 0 when the check was skipped.
    pub independence_checked_to: u32,
}

impl IrrationalPair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, TorusError> {
        Self::with_bound(alpha, beta, INDEPENDENCE_BOUND)
    }

    pub fn with_bound(alpha: f64, beta: f64, bound: u32) -> Result<Self, TorusError> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(TorusError::NonFinite);
        }
        if bound < INDEPENDENCE_BOUND {
            return Err(TorusError::BoundTooSmall(bound));
        }
        if let Some((k, k0)) = find_integer_relation(&[alpha, beta], bound) {
            return Err(TorusError::Dependent { k0, k1: k[0], k2: k[1] });
        }
        Ok(IrrationalPair { alpha, beta, independence_checked_to: bound })
    }

    /// Skips the independence check, for constructions that only need the
    /// slopes (rational test pairs included).
    pub fn unchecked(alpha: f64, beta: f64) -> Result<Self, TorusError> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(TorusError::NonFinite);
        }
        Ok(IrrationalPair { alpha, beta, independence_checked_to: 0 })
    }

    /// Both slopes reduced to `[0, 1)`.
    pub fn reduced(&self) -> Self {
        IrrationalPair {
            alpha: self.alpha - self.alpha.floor(),
            beta: self.beta - self.beta.floor(),
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_check() {
        let p = IrrationalPair::new(2f64.sqrt(), 3f64.sqrt()).unwrap();
        assert_eq!(p.independence_checked_to, 1000);
        assert!(matches!(IrrationalPair::new(0.07, 0.09), Err(TorusError::Dependent { .. })));
        assert!(matches!(IrrationalPair::new(0.5, 2f64.sqrt()), Err(TorusError::Dependent { .. })));
        assert!(IrrationalPair::unchecked(0.07, 0.09).is_ok());
        assert!(matches!(IrrationalPair::new(f64::NAN, 0.1), Err(TorusError::NonFinite)));
    }

    #[test]
    fn reduction_is_exact() {
        let p = IrrationalPair::new(std::f64::consts::PI, std::f64::consts::E).unwrap().reduced();
        assert_eq!(p.alpha, std::f64::consts::PI - 3.0);
        assert_eq!(p.beta, std::f64::consts::E - 2.0);
    }
}
