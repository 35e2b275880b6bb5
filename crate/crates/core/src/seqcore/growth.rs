//! Asymptotic classes of closed-form sequences.
//!
//! A [`Growth`] describes a sequence up to a multiplicative constant as
//! `n -> infinity`. It is closed under products, real powers, partial sums and
//! generalized inversion for the templates the criteria need, which lets
//! limit and summability clauses be decided by exact exponent comparison
//! instead of a finite-horizon fit.

use serde::{Deserialize, Serialize};

const EXP_TOL: f64 = 1e-12;

/// `coef * n^p * (ln n)^q * (ln ln n)^r`, a geometric `coef * rate^n`, or zero.
///
/// `coef` is `None` when only the class is known (for instance the limit of a
/// convergent series).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Growth {
    Zero,
    Poly {
        coef: Option<f64>,
        p: f64,
        q: f64,
        r: f64,
    },
    Geometric {
        coef: Option<f64>,
        rate: f64,
    },
}

fn cmp_exp(a: f64, b: f64) -> std::cmp::Ordering {
    if (a - b).abs() <= EXP_TOL {
        std::cmp::Ordering::Equal
    } else if a < b {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

impl Growth {
    pub fn poly(coef: f64, p: f64, q: f64) -> Self {
        if coef == 0.0 {
            Growth::Zero
        } else {
            Growth::Poly {
                coef: Some(coef),
                p,
                q,
                r: 0.0,
            }
        }
    }

    /// A positive constant of unknown value.
    pub fn bounded() -> Self {
        Growth::Poly {
            coef: None,
            p: 0.0,
            q: 0.0,
            r: 0.0,
        }
    }

    /// Lexicographic sign of the exponent triple, or of `ln rate`.
    fn order(&self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        match *self {
            Growth::Zero => None,
            Growth::Poly { p, q, r, .. } => {
                Some(cmp_exp(p, 0.0).then(cmp_exp(q, 0.0)).then(cmp_exp(r, 0.0)))
            }
            Growth::Geometric { rate, .. } => Some(if (rate - 1.0).abs() <= EXP_TOL {
                Equal
            } else if rate < 1.0 {
                Less
            } else {
                Greater
            }),
        }
    }

    pub fn tends_to_zero(&self) -> bool {
        match self.order() {
            None => true,
            Some(o) => o == std::cmp::Ordering::Less,
        }
    }

    pub fn tends_to_infinity(&self) -> bool {
        matches!(self.order(), Some(std::cmp::Ordering::Greater))
    }

    /// Whether `sum_n term_n < infinity` for a sequence of this class.
    pub fn summable(&self) -> bool {
        use std::cmp::Ordering::*;
        match *self {
            Growth::Zero => true,
            Growth::Geometric { rate, .. } => rate < 1.0 - EXP_TOL,
            Growth::Poly { p, q, r, .. } => {
                cmp_exp(p, -1.0)
                    .then(cmp_exp(q, -1.0))
                    .then(cmp_exp(r, -1.0))
                    == Less
            }
        }
    }

    pub fn times(self, other: Growth) -> Growth {
        use Growth::*;
        let prod = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(x, y)| x * y);
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (
                Poly {
                    coef: c1,
                    p: p1,
                    q: q1,
                    r: r1,
                },
                Poly {
                    coef: c2,
                    p: p2,
                    q: q2,
                    r: r2,
                },
            ) => Poly {
                coef: prod(c1, c2),
                p: p1 + p2,
                q: q1 + q2,
                r: r1 + r2,
            },
            (Geometric { coef: c1, rate: a }, Geometric { coef: c2, rate: b }) => Geometric {
                coef: prod(c1, c2),
                rate: a * b,
            },
            (Geometric { rate, .. }, Poly { p, q, r, .. })
            | (Poly { p, q, r, .. }, Geometric { rate, .. }) => {
                if (rate - 1.0).abs() <= EXP_TOL {
                    Poly {
                        coef: None,
                        p,
                        q,
                        r,
                    }
                } else {
                    Geometric { coef: None, rate }
                }
            }
        }
    }

    pub fn powf(self, e: f64) -> Growth {
        match self {
            Growth::Zero => {
                if e > 0.0 {
                    Growth::Zero
                } else {
                    // 0^0 = 1 and negative powers of 0 are not classes
                    Growth::bounded()
                }
            }
            Growth::Poly { coef, p, q, r } => Growth::Poly {
                coef: coef.map(|c| c.powf(e)),
                p: p * e,
                q: q * e,
                r: r * e,
            },
            Growth::Geometric { coef, rate } => Growth::Geometric {
                coef: coef.map(|c| c.powf(e)),
                rate: rate.powf(e),
            },
        }
    }

    pub fn recip(self) -> Growth {
        self.powf(-1.0)
    }

    pub fn scale(self, s: f64) -> Growth {
        if s == 0.0 {
            return Growth::Zero;
        }
        match self {
            Growth::Zero => Growth::Zero,
            Growth::Poly { coef, p, q, r } => Growth::Poly {
                coef: coef.map(|c| c * s),
                p,
                q,
                r,
            },
            Growth::Geometric { coef, rate } => Growth::Geometric {
                coef: coef.map(|c| c * s),
                rate,
            },
        }
    }

    /// Class of `n -> sum_{k <= n} term_k`. `None` when the result leaves the
    /// representable family (`sum 1/(n ln n ln ln n)`).
    pub fn partial_sum(self) -> Option<Growth> {
        use std::cmp::Ordering::*;
        match self {
            Growth::Zero => Some(Growth::Zero),
            Growth::Geometric { coef, rate } => Some(match cmp_exp(rate, 1.0) {
                Less => Growth::bounded(),
                Equal => Growth::Poly {
                    coef,
                    p: 1.0,
                    q: 0.0,
                    r: 0.0,
                },
                Greater => Growth::Geometric { coef: None, rate },
            }),
            Growth::Poly { coef, p, q, r } => {
                if self.summable() {
                    return Some(Growth::bounded());
                }
                match cmp_exp(p, -1.0) {
                    Greater => Some(Growth::Poly {
                        coef: coef.map(|c| c / (p + 1.0)),
                        p: p + 1.0,
                        q,
                        r,
                    }),
                    _ => match cmp_exp(q, -1.0) {
                        Greater => Some(Growth::Poly {
                            coef: coef.map(|c| c / (q + 1.0)),
                            p: 0.0,
                            q: q + 1.0,
                            r,
                        }),
                        _ => match cmp_exp(r, -1.0) {
                            Greater => Some(Growth::Poly {
                                coef: coef.map(|c| c / (r + 1.0)),
                                p: 0.0,
                                q: 0.0,
                                r: r + 1.0,
                            }),
                            _ => None,
                        },
                    },
                }
            }
        }
    }

    /// Class of `n -> v^{-1}(level_n)` where `self` is the class of a
    /// nonincreasing sequence `v` and `level` the class of the argument.
    ///
    /// Returns `None` when the composition is outside the family.
    pub fn inverse_at(self, level: Growth) -> Option<Growth> {
        if !level.tends_to_zero() {
            // v^{-1} of a level bounded away from zero is eventually constant
            return if self.tends_to_zero() {
                Some(Growth::bounded())
            } else {
                None
            };
        }
        match self {
            // v_n = 0 for n >= 1: the first index below any positive level is 1
            Growth::Zero => Some(Growth::bounded()),
            Growth::Geometric { rate, .. } if rate < 1.0 => match level {
                // ln(1/level) / ln(1/rate)
                Growth::Poly { p, q, r, .. } if p.abs() > EXP_TOL => {
                    (q.is_finite() && r.is_finite()).then_some(Growth::Poly {
                        coef: None,
                        p: 0.0,
                        q: 1.0,
                        r: 0.0,
                    })
                }
                Growth::Geometric { rate: lr, .. } => Some(Growth::Poly {
                    coef: Some(lr.ln() / rate.ln()),
                    p: 1.0,
                    q: 0.0,
                    r: 0.0,
                }),
                _ => None,
            },
            Growth::Poly {
                coef: Some(c),
                p,
                q,
                r,
            } if p < -EXP_TOL && r.abs() <= EXP_TOL => match level {
                Growth::Poly {
                    coef: lc,
                    p: s,
                    q: t,
                    r: lr,
                } if s < -EXP_TOL && lr.abs() <= EXP_TOL => {
                    // c m^p (ln m)^q = level  =>  m ~ (level/c)^{1/p} (ln m)^{-q/p},
                    // ln m ~ (s/p) ln n
                    let ln_ratio = s / p;
                    Some(Growth::Poly {
                        coef: lc.map(|l| (l / c).powf(1.0 / p) * ln_ratio.powf(-q / p)),
                        p: s / p,
                        q: t / p - q / p,
                        r: 0.0,
                    })
                }
                Growth::Geometric { rate: lr, .. } if lr < 1.0 => Some(Growth::Geometric {
                    coef: None,
                    rate: lr.powf(1.0 / p),
                }),
                _ => None,
            },
            _ => None,
        }
    }
}
