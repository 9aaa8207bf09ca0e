//! Exact line search along a coordinate (or a direction) of the quartic
//! objective, reduced to picking the right root of a monic cubic.

/// Monic cubic `α³ + bα² + cα + d`, proportional to `h'(α)` of a quartic
/// `h` with leading coefficient one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs {
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CubicCoeffs {
    pub fn new(b: f64, c: f64, d: f64) -> Self {
        Self { b, c, d }
    }

    /// Depressed form `β³ + pβ + q`.
    pub fn depressed(p: f64, q: f64) -> Self {
        Self { b: 0.0, c: p, d: q }
    }

    pub fn eval(&self, a: f64) -> f64 {
        ((a + self.b) * a + self.c) * a + self.d
    }

    fn derivative(&self, a: f64) -> f64 {
        (3.0 * a + 2.0 * self.b) * a + self.c
    }

    /// `h(α) − h(0) = α⁴ + (4b/3)α³ + 2cα² + 4dα`.
    pub fn delta(&self, a: f64) -> f64 {
        (((a + 4.0 * self.b / 3.0) * a + 2.0 * self.c) * a + 4.0 * self.d) * a
    }

    /// Real roots in ascending order, with multiplicity collapsed: one, two
    /// (single + double, single first in the tuple) or three distinct.
    pub fn real_roots(&self) -> Roots {
        let CubicCoeffs { b, c, d } = *self;
        let shift = b / 3.0;
        let p = c - b * shift;
        let q = (2.0 * shift * shift - c) * shift + d;

        let roots = if p == 0.0 && q == 0.0 {
            Roots::One(0.0)
        } else if p == 0.0 {
            Roots::One((-q).cbrt())
        } else {
            // disc > 0: three real; disc < 0: one real; zero: repeated.
            let disc = -(4.0 * p * p * p + 27.0 * q * q);
            if disc > 0.0 {
                let m = 2.0 * (-p / 3.0).sqrt();
                let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
                let theta = arg.acos() / 3.0;
                let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
                let mut r = [
                    m * theta.cos(),
                    m * (theta - two_pi_3).cos(),
                    m * (theta - 2.0 * two_pi_3).cos(),
                ];
                r.sort_by(f64::total_cmp);
                Roots::Three(r[0], r[1], r[2])
            } else if disc < 0.0 {
                let h = (q * q / 4.0 + p * p * p / 27.0).sqrt();
                // Pick the larger-magnitude branch to avoid cancellation.
                let u = (-q / 2.0 - q.signum() * h).cbrt();
                let y = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
                Roots::One(y)
            } else {
                Roots::Two {
                    single: 3.0 * q / p,
                    double: -1.5 * q / p,
                }
            }
        };
        let polish = |y: f64| self.newton(y - shift);
        match roots {
            Roots::One(r) => Roots::One(polish(r)),
            Roots::Two { single, double } => Roots::Two {
                single: polish(single),
                double: double - shift,
            },
            Roots::Three(a, b, c) => {
                let mut r = [polish(a), polish(b), polish(c)];
                r.sort_by(f64::total_cmp);
                Roots::Three(r[0], r[1], r[2])
            }
        }
    }

    fn newton(&self, mut a: f64) -> f64 {
        for _ in 0..2 {
            let slope = self.derivative(a);
            if slope == 0.0 || !slope.is_finite() {
                break;
            }
            let next = a - self.eval(a) / slope;
            if !next.is_finite() || self.eval(next).abs() > self.eval(a).abs() {
                break;
            }
            a = next;
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Roots {
    One(f64),
    Two { single: f64, double: f64 },
    Three(f64, f64, f64),
}

/// Root of the cubic minimizing the associated quartic.
///
/// A lone real root is the minimizer; with a double root the single root
/// wins; with three distinct roots the middle one is a local maximum and
/// the outer root farther from it wins. Exact ties compare
/// [`CubicCoeffs::delta`], then take the smaller root.
pub fn solve_cubic_min(coeffs: &CubicCoeffs) -> f64 {
    match coeffs.real_roots() {
        Roots::One(r) => r,
        Roots::Two { single, .. } => single,
        Roots::Three(lo, mid, hi) => {
            let (dlo, dhi) = (mid - lo, hi - mid);
            if dlo > dhi {
                lo
            } else if dhi > dlo || coeffs.delta(hi) < coeffs.delta(lo) {
                hi
            } else {
                lo
            }
        }
    }
}

/// `Δf = α⁴ + (4b/3)α³ + 2cα² + 4dα`.
pub fn delta_f(alpha: f64, coeffs: &CubicCoeffs) -> f64 {
    coeffs.delta(alpha)
}
