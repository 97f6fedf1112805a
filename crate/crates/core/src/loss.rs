//! Scalar losses and kernels shared by every solver.
//!
//! The solvers use the unnormalized kernel `exp(-λ|e|^α)`; the normalizing
//! constant `γ` is only exposed through [`ggd`] and [`gc_loss`].

use num_traits::Float;
use crate::error::{Error, Result};

/// Shape and bandwidth of a generalized Gaussian density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgdParams {
    alpha: f64,
    beta: f64,
}

impl GgdParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", "shape exponent must be positive and finite"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::param("beta", "bandwidth must be positive and finite"));
        }
        Ok(GgdParams { alpha, beta })
    }

    /// The `α = 2` member whose kernel is `exp(-e²/(2σ²))`, i.e. `β = √2·σ`.
    pub fn gaussian(sigma: KernelSize) -> Self {
        GgdParams {
            alpha: 2.0,
            beta: core::f64::consts::SQRT_2 * sigma.get(),
        }
    }

    /// Generalized member sharing the kernel size convention of [`gaussian`](Self::gaussian).
    pub fn with_kernel_size(alpha: f64, sigma: KernelSize) -> Result<Self> {
        GgdParams::new(alpha, core::f64::consts::SQRT_2 * sigma.get())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `λ = 1/β^α`.
    pub fn lambda(&self) -> f64 {
        1.0 / self.beta.powf(self.alpha)
    }

    /// `γ = α / (2β·Γ(1/α))`.
    pub fn gamma(&self) -> f64 {
        self.alpha / (2.0 * self.beta * libm::tgamma(1.0 / self.alpha))
    }

    /// Unnormalized kernel `exp(-λ|e|^α)`, in `(0, 1]`.
    pub fn kernel(&self, e: f64) -> f64 {
        (-self.lambda() * abs_pow(e, self.alpha)).exp()
    }

    /// Derivative of [`kernel`](Self::kernel) with respect to `e`.
    pub fn kernel_derivative(&self, e: f64) -> f64 {
        if e == 0.0 {
            return 0.0;
        }
        let lambda = self.lambda();
        let mag = abs_pow(e, self.alpha);
        -lambda * self.alpha * (mag / e.abs()) * e.signum() * (-lambda * mag).exp()
    }
}

/// `|e|^α` through `exp(α·ln|e|)`, with `e = 0` mapped to 0.
pub fn abs_pow(e: f64, alpha: f64) -> f64 {
    let m = e.abs();
    if m == 0.0 {
        0.0
    } else if alpha == 2.0 {
        m * m
    } else {
        (alpha * m.ln()).exp()
    }
}

/// Generalized Gaussian density `γ·exp(-λ|e|^α)`.
pub fn ggd(e: f64, p: &GgdParams) -> f64 {
    p.gamma() * p.kernel(e)
}

/// Generalized correntropy loss `γ·(1 - exp(-λ|e|^α)) = ggd(0) - ggd(e)`.
pub fn gc_loss(e: f64, p: &GgdParams) -> f64 {
    p.gamma() * -(-p.lambda() * abs_pow(e, p.alpha)).exp_m1()
}

/// Gaussian kernel bandwidth `σ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct KernelSize(pub(crate) f64);

impl KernelSize {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(KernelSize(sigma))
        } else {
            Err(Error::param("sigma", "kernel size must be positive and finite"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `2σ²`
    pub fn two_var(self) -> f64 {
        2.0 * self.0 * self.0
    }

    /// Unnormalized correntropy kernel `exp(-e²/(2σ²))`.
    pub fn kernel(self, e: f64) -> f64 {
        self.kernel_sq(e * e)
    }

    /// Same kernel evaluated from an already squared error.
    pub fn kernel_sq(self, e_sq: f64) -> f64 {
        (-e_sq / self.two_var()).exp()
    }

    /// Correntropy loss with `γ` dropped: `1 - exp(-e²/(2σ²))`.
    pub fn loss(self, e: f64) -> f64 {
        -(-(e * e) / self.two_var()).exp_m1()
    }
}

/// Scale `c` of the Cauchy loss.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CauchyScale(f64);

impl CauchyScale {
    pub fn new(c: f64) -> Result<Self> {
        if c > 0.0 && c.is_finite() {
            Ok(CauchyScale(c))
        } else {
            Err(Error::param("c", "Cauchy scale must be positive and finite"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `log(1 + e²/c²)`.
pub fn cauchy_loss(e: f64, s: CauchyScale) -> f64 {
    let r = e / s.0;
    (r * r).ln_1p()
}

pub fn l1_loss(e: f64) -> f64 {
    e.abs()
}

pub fn l2_loss(e: f64) -> f64 {
    e * e
}

/// Half-quadratic auxiliary weight of the correntropy loss:
/// `-exp(-r²/(2σ²))`, where `r²` is the squared residual.
///
/// Kept at or below `-f64::MIN_POSITIVE` so the weight stays strictly
/// negative when the exponential underflows.
pub fn correntropy_weight(res_sq: f64, sigma: KernelSize) -> f64 {
    -sigma.kernel_sq(res_sq).max(f64::MIN_POSITIVE)
}

/// Reweighting factor of the Cauchy loss, `-1/(1 + r²/c²)`, carried with the
/// same negative sign convention as [`correntropy_weight`].
pub fn cauchy_weight(res_sq: f64, c: CauchyScale) -> f64 {
    -1.0 / (1.0 + res_sq / (c.0 * c.0))
}

/// Convex function `g(a) = -a·ln(-a) + a` on `a < 0` whose conjugate is
/// `exp(-b)`; the supremum of `b·a - g(a)` sits at `a = -exp(-b)`.
pub fn hq_g(a: f64) -> f64 {
    debug_assert!(a < 0.0);
    -a * (-a).ln() + a
}
