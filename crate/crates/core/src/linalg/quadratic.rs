use serde::Serialize;

use super::{c, CNum};

/// Coefficients with magnitude at most this fraction of the largest
/// coefficient magnitude are treated as zero.
pub const COEFF_ZERO_TOL: f64 = 1e-12;

/// Solution set of `a z^2 + b z + c = 0` over the complex numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "branch", rename_all = "PascalCase")]
pub enum RootSet {
    /// Genuine quadratic. Roots are ordered by real part, then imaginary
    /// part; `double` marks a collapsed pair.
    TwoRoots {
        roots: [CNum; 2],
        double: bool,
    },
    OneRoot {
        root: CNum,
    },
    /// The zero polynomial.
    AllComplex,
    /// Nonzero constant.
    NoRoot,
}

impl RootSet {
    /// The distinct roots, in order. Empty for `NoRoot` and `AllComplex`.
    pub fn distinct(&self) -> Vec<CNum> {
        match *self {
            RootSet::TwoRoots { roots, double } => {
                if double {
                    vec![roots[0]]
                } else {
                    roots.to_vec()
                }
            }
            RootSet::OneRoot { root } => vec![root],
            RootSet::AllComplex | RootSet::NoRoot => Vec::new(),
        }
    }

    pub fn branch_name(&self) -> &'static str {
        match self {
            RootSet::TwoRoots { .. } => "TwoRoots",
            RootSet::OneRoot { .. } => "OneRoot",
            RootSet::AllComplex => "AllComplex",
            RootSet::NoRoot => "NoRoot",
        }
    }
}

pub fn solve_quadratic(a: CNum, b: CNum, cc: CNum) -> RootSet {
    let scale = a.norm().max(b.norm()).max(cc.norm());
    if scale == 0.0 {
        return RootSet::AllComplex;
    }
    let zero = |z: CNum| z.norm() <= COEFF_ZERO_TOL * scale;

    if zero(a) {
        if zero(b) {
            return if zero(cc) {
                RootSet::AllComplex
            } else {
                RootSet::NoRoot
            };
        }
        return RootSet::OneRoot { root: -cc / b };
    }

    let disc = (b * b - a * cc * 4.0).sqrt();
    // pick the sign that avoids cancellation in b + sqrt(disc)
    let sign = if (b.conj() * disc).re >= 0.0 {
        1.0
    } else {
        -1.0
    };
    let q = -(b + disc * sign) * 0.5;
    let (r1, r2) = if q == c(0.0, 0.0) {
        (c(0.0, 0.0), c(0.0, 0.0))
    } else {
        (q / a, cc / q)
    };
    let mut roots = [r1, r2];
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let spread = (roots[0] - roots[1]).norm();
    let double = spread <= 1e-12 * roots[0].norm().max(roots[1].norm()).max(1.0);
    if double {
        roots[1] = roots[0];
    }
    RootSet::TwoRoots { roots, double }
}
