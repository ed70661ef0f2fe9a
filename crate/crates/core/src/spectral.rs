//! Eigenvalues of the no-jump generator.
//!
//! `det(λI − A) = λ³ + (β₁/2 + β₂/2)λ² + (β₁β₂/4 + Ω₁² + Ω₂²)λ + (Ω₁²β₂/2 + Ω₂²β₁/2)`.
//! The exact roots come from this cubic. For weak drive (`ε ≪ 1`) it
//! factorizes approximately as `(x + ½)(x² + Bx + C)` in `x = λ/β₁`, which
//! gives the asymptotic underdamped pair and, when `Ω₂² ≪ β_ℓ²`, three
//! well-separated real rates.

use num_complex::Complex64;

use crate::model::{classify_regime, Regime, RegimeThresholds, SystemParams};
use crate::{Error, Result};

/// Monic cubic `λ³ + p2 λ² + p1 λ + p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub p2: f64,
    pub p1: f64,
    pub p0: f64,
}

impl Cubic {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        ((z + self.p2) * z + self.p1) * z + self.p0
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        (z * 3.0 + 2.0 * self.p2) * z + self.p1
    }

    /// `|f(z)|` divided by the sum of the magnitudes of its terms.
    pub fn relative_residual(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let scale = r * r * r + self.p2.abs() * r * r + self.p1.abs() * r + self.p0.abs();
        if scale == 0.0 {
            0.0
        } else {
            self.eval(z).norm() / scale
        }
    }

    fn eval_real(&self, x: f64) -> f64 {
        ((x + self.p2) * x + self.p1) * x + self.p0
    }

    /// One real root, by bisection on a sign change then Newton polish.
    fn real_root(&self) -> f64 {
        if self.p0 == 0.0 {
            return 0.0;
        }
        let bound = 1.0 + self.p2.abs().max(self.p1.abs()).max(self.p0.abs());
        // f(0) = p0 > 0 and f(-bound) < 0.
        let (mut lo, mut hi) = (-bound, 0.0);
        let mut f_lo = self.eval_real(lo);
        for _ in 0..2200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = self.eval_real(mid);
            if f_mid == 0.0 {
                return mid;
            }
            if (f_mid < 0.0) == (f_lo < 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All three roots.
    pub fn roots(&self) -> [Complex64; 3] {
        let r = self.real_root();
        // Deflate: (λ - r)(λ² + aλ + b).
        // Forward deflation leaves p0 unmatched, backward leaves p1; keep
        // whichever has the smaller relative mismatch.
        let a = self.p2 + r;
        let forward = self.p1 + r * a;
        let b = if r != 0.0 {
            let backward = -self.p0 / r;
            let miss_f = (r * forward + self.p0).abs() / ((r * forward).abs() + self.p0.abs());
            let miss_b = (backward - r * a - self.p1).abs()
                / (backward.abs() + (r * a).abs() + self.p1.abs());
            if miss_b < miss_f {
                backward
            } else {
                forward
            }
        } else {
            forward
        };
        let (q1, q2) = solve_monic_quadratic(a, b);
        let polished = [
            Complex64::new(self.polish_real(r), 0.0),
            self.polish(q1),
            self.polish(q2),
        ];
        if q1.im != 0.0 {
            // Keep the pair exactly conjugate.
            let z = polished[1];
            [polished[0], z, z.conj()]
        } else {
            polished
        }
    }

    fn polish_real(&self, x: f64) -> f64 {
        self.polish(Complex64::new(x, 0.0)).re
    }

    fn polish(&self, mut z: Complex64) -> Complex64 {
        let mut best = self.eval(z).norm();
        for _ in 0..4 {
            let d = self.derivative(z);
            if d.norm() == 0.0 {
                break;
            }
            let next = z - self.eval(z) / d;
            let f = self.eval(next).norm();
            if !(f < best) {
                break;
            }
            best = f;
            z = next;
        }
        z
    }
}

/// Roots of `z² + a z + b`, avoiding cancellation.
fn solve_monic_quadratic(a: f64, b: f64) -> (Complex64, Complex64) {
    let disc = a * a - 4.0 * b;
    if disc >= 0.0 {
        let q = -0.5 * (a + a.signum() * libm::sqrt(disc));
        if q == 0.0 {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (Complex64::new(q, 0.0), Complex64::new(b / q, 0.0))
        }
    } else {
        let im = 0.5 * libm::sqrt(-disc);
        (Complex64::new(-0.5 * a, im), Complex64::new(-0.5 * a, -im))
    }
}

/// Exact characteristic cubic of the generator.
pub fn characteristic_cubic(params: &SystemParams) -> Cubic {
    let SystemParams {
        omega1,
        omega2,
        beta1,
        beta2,
    } = *params;
    let (o1, o2) = (omega1 * omega1, omega2 * omega2);
    Cubic {
        p2: 0.5 * (beta1 + beta2),
        p1: 0.25 * beta1 * beta2 + o1 + o2,
        p0: 0.5 * (o1 * beta2 + o2 * beta1),
    }
}

/// Weak-drive factorization `(x + ½)(x² + Bx + C)` in `x = λ/β₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCubic {
    /// `2β_ℓ/β₁`.
    pub b: f64,
    /// `Ω₂²/β₁² + 2ε²β₂/β₁`.
    pub c: f64,
}

impl ReducedCubic {
    pub fn new(params: &SystemParams) -> Self {
        let eps = params.epsilon();
        let w = params.omega2 / params.beta1;
        Self {
            b: 2.0 * params.slow_rate() / params.beta1,
            c: w * w + 2.0 * eps * eps * params.beta2 / params.beta1,
        }
    }

    /// Roots in `x`: `-½` and the pair of `x² + Bx + C`.
    pub fn roots(&self) -> [Complex64; 3] {
        let (a, b) = solve_monic_quadratic(self.b, self.c);
        [Complex64::new(-0.5, 0.0), a, b]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenKind {
    Exact,
    AsymptoticUnderdamped,
    AsymptoticOverdamped,
}

impl EigenKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::AsymptoticUnderdamped => "asymptotic-underdamped",
            Self::AsymptoticOverdamped => "asymptotic-overdamped",
        }
    }
}

/// Three eigenvalues (1/s), sorted by descending real part, then by
/// descending imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub lambdas: [Complex64; 3],
    pub kind: EigenKind,
}

impl EigenTriple {
    pub fn new(mut lambdas: [Complex64; 3], kind: EigenKind) -> Self {
        lambdas.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(
                    b.im.partial_cmp(&a.im)
                        .unwrap_or(core::cmp::Ordering::Equal),
                )
        });
        Self { lambdas, kind }
    }

    /// The eigenvalue with the largest real part (the longest-lived mode).
    pub fn slowest(&self) -> Complex64 {
        self.lambdas[0]
    }

    /// The eigenvalues in units of `β₁`.
    pub fn dimensionless(&self, beta1: f64) -> [Complex64; 3] {
        self.lambdas.map(|l| l / beta1)
    }

    pub fn is_real(&self) -> bool {
        self.lambdas.iter().all(|l| l.im == 0.0)
    }
}

/// Roots of [`characteristic_cubic`].
pub fn exact_eigenvalues(params: &SystemParams) -> EigenTriple {
    EigenTriple::new(characteristic_cubic(params).roots(), EigenKind::Exact)
}

/// `{−β₁/2, −β_ℓ ± √(β_ℓ² − Ω₂² − 2ε²β₁β₂)}`.
pub fn asymptotic_underdamped(params: &SystemParams) -> EigenTriple {
    let beta_ell = params.slow_rate();
    let eps = params.epsilon();
    let radicand = beta_ell * beta_ell
        - (params.omega2 * params.omega2 + 2.0 * eps * eps * params.beta1 * params.beta2);
    let root = Complex64::new(radicand, 0.0).sqrt();
    let centre = Complex64::new(-beta_ell, 0.0);
    EigenTriple::new(
        [
            Complex64::new(-params.beta1 / 2.0, 0.0),
            centre + root,
            centre - root,
        ],
        EigenKind::AsymptoticUnderdamped,
    )
}

/// The three real overdamped rates, named by their origin rather than size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverdampedRates {
    /// `−β₁/2`, the bright-level decay.
    pub lambda1: f64,
    /// `−2β_ℓ`, the `O(ε²β₁)` rate that ends ordinary dark periods.
    pub lambda2: f64,
    /// `−η²β₁/2`, the `O(η²β₁)` rate of extra-long dark periods.
    pub lambda3: f64,
}

impl OverdampedRates {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let lambda3 = if params.omega2 == 0.0 {
            0.0
        } else if params.omega1 == 0.0 {
            return Err(Error::EtaUndefined);
        } else {
            let eta = params.omega2 / params.omega1;
            -eta * eta * params.beta1 / 2.0
        };
        Ok(Self {
            lambda1: -params.beta1 / 2.0,
            lambda2: -2.0 * params.slow_rate(),
            lambda3,
        })
    }

    pub fn triple(&self) -> EigenTriple {
        EigenTriple::new(
            [self.lambda1, self.lambda2, self.lambda3].map(|x| Complex64::new(x, 0.0)),
            EigenKind::AsymptoticOverdamped,
        )
    }
}

pub fn asymptotic_overdamped(params: &SystemParams) -> Result<EigenTriple> {
    Ok(OverdampedRates::new(params)?.triple())
}

/// An asymptotic triple paired against the exact roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticMatch {
    pub triple: EigenTriple,
    /// For each exact eigenvalue (in sorted order) its matched asymptotic value.
    pub matched: [Complex64; 3],
    /// `|exact − asymptotic| / |exact|`; absolute error where `exact = 0`.
    pub relative_errors: [f64; 3],
}

impl AsymptoticMatch {
    fn pair(exact: &EigenTriple, triple: EigenTriple) -> Self {
        let matched = pair_nearest(&exact.lambdas, &triple.lambdas);
        let mut relative_errors = [0.0; 3];
        for i in 0..3 {
            let e = exact.lambdas[i];
            let d = (e - matched[i]).norm();
            relative_errors[i] = if e.norm() > 0.0 { d / e.norm() } else { d };
        }
        Self {
            triple,
            matched,
            relative_errors,
        }
    }

    pub fn max_error(&self) -> f64 {
        self.relative_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Greedy nearest-neighbour pairing; ties go to the larger real part.
fn pair_nearest(exact: &[Complex64; 3], approx: &[Complex64; 3]) -> [Complex64; 3] {
    let mut out = [Complex64::new(f64::NAN, f64::NAN); 3];
    let (mut used_e, mut used_a) = ([false; 3], [false; 3]);
    for _ in 0..3 {
        let mut best: Option<(f64, f64, usize, usize)> = None;
        for i in (0..3).filter(|&i| !used_e[i]) {
            for j in (0..3).filter(|&j| !used_a[j]) {
                let d = (exact[i] - approx[j]).norm();
                let re = exact[i].re;
                let better = match best {
                    None => true,
                    Some((bd, bre, _, _)) => d < bd || (d == bd && re > bre),
                };
                if better {
                    best = Some((d, re, i, j));
                }
            }
        }
        let (_, _, i, j) = best.expect("three unmatched pairs remain");
        used_e[i] = true;
        used_a[j] = true;
        out[i] = approx[j];
    }
    out
}

/// Exact roots against both asymptotic forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenComparison {
    pub exact: EigenTriple,
    pub regime: Regime,
    pub underdamped: AsymptoticMatch,
    /// `None` when `η` is undefined (`Ω₁ = 0 < Ω₂`).
    pub overdamped: Option<AsymptoticMatch>,
}

pub fn eigen_compare(params: &SystemParams, thresholds: &RegimeThresholds) -> EigenComparison {
    let exact = exact_eigenvalues(params);
    EigenComparison {
        exact,
        regime: classify_regime(params, thresholds),
        underdamped: AsymptoticMatch::pair(&exact, asymptotic_underdamped(params)),
        overdamped: asymptotic_overdamped(params)
            .ok()
            .map(|t| AsymptoticMatch::pair(&exact, t)),
    }
}
