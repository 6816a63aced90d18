//! Parameter sets, case classification and the exponent function.
//!
//! Two Poisson branching processes with Poisson immigration are compared: the
//! alternative `A` with offspring mean `beta_a` and immigration mean `alpha_a`,
//! and the hypothesis `H` with `beta_h`, `alpha_h`. From state `x` the next
//! generation is Poisson with mean `f(x) = beta * x + alpha`.
//!
//! For an order `λ ∈ (0,1)` the one-step Hellinger factor is driven by
//!
//! ```text
//! varphi(x) = f_A(x)^λ f_H(x)^(1-λ)
//! f_λ(x)    = λ f_A(x) + (1-λ) f_H(x)
//! phi(x)    = varphi(x) - f_λ(x)   (≤ 0, concave)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for ratio and integrality tests in [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-12;

/// Offspring and immigration means of the alternative and the hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    /// Mean offspring under the alternative.
    pub beta_a: f64,
    /// Mean offspring under the hypothesis.
    pub beta_h: f64,
    /// Mean immigration under the alternative.
    pub alpha_a: f64,
    /// Mean immigration under the hypothesis.
    pub alpha_h: f64,
}

impl ParamSet {
    /// Validates and builds a parameter set.
    ///
    /// Both offspring means must be positive. Either both immigration means
    /// vanish (then the offspring means must differ) or both are positive
    /// (then the two laws must differ in at least one coordinate).
    pub fn new(beta_a: f64, beta_h: f64, alpha_a: f64, alpha_h: f64) -> Result<Self> {
        let all = [beta_a, beta_h, alpha_a, alpha_h];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if beta_a <= 0.0 || beta_h <= 0.0 {
            return Err(Error::InvalidParams("offspring means must be positive".into()));
        }
        if alpha_a < 0.0 || alpha_h < 0.0 {
            return Err(Error::InvalidParams("immigration means must be nonnegative".into()));
        }
        let no_imm = alpha_a == 0.0 && alpha_h == 0.0;
        if no_imm {
            if beta_a == beta_h {
                return Err(Error::InvalidParams(
                    "without immigration the offspring means must differ".into(),
                ));
            }
        } else if alpha_a == 0.0 || alpha_h == 0.0 {
            return Err(Error::InvalidParams(
                "immigration means must be both zero or both positive".into(),
            ));
        } else if beta_a == beta_h && alpha_a == alpha_h {
            return Err(Error::InvalidParams("the two laws coincide".into()));
        }
        Ok(Self { beta_a, beta_h, alpha_a, alpha_h })
    }

    /// Parameters with the roles of alternative and hypothesis exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            beta_a: self.beta_h,
            beta_h: self.beta_a,
            alpha_a: self.alpha_h,
            alpha_h: self.alpha_a,
        }
    }

    /// True for the no-immigration family.
    pub fn is_no_immigration(&self) -> bool {
        self.alpha_a == 0.0 && self.alpha_h == 0.0
    }

    /// Conditional mean of the next generation under the alternative.
    pub fn f_a(&self, x: f64) -> f64 {
        self.alpha_a + self.beta_a * x
    }

    /// Conditional mean of the next generation under the hypothesis.
    pub fn f_h(&self, x: f64) -> f64 {
        self.alpha_h + self.beta_h * x
    }

    /// `alpha_h * beta_a - alpha_a * beta_h`; zero exactly when `phi` is linear.
    pub fn gamma(&self) -> f64 {
        self.alpha_h * self.beta_a - self.alpha_a * self.beta_h
    }

    /// λ-weighted averages of the offspring and immigration means.
    pub fn weights(&self, lambda: Order) -> LambdaWeights {
        let l = lambda.get();
        LambdaWeights {
            beta_lambda: l * self.beta_a + (1.0 - l) * self.beta_h,
            alpha_lambda: l * self.alpha_a + (1.0 - l) * self.alpha_h,
        }
    }

    /// Ratio `f_A(x) / f_H(x)`, continued at `x = 0` on the no-immigration family.
    pub fn ratio(&self, x: f64) -> f64 {
        if self.is_no_immigration() {
            self.beta_a / self.beta_h
        } else {
            self.f_a(x) / self.f_h(x)
        }
    }
}

/// Order `λ` of the Hellinger integral, strictly inside `(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Order(f64);

impl Order {
    /// Validates `0 < lambda < 1`.
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda > 0.0 && lambda < 1.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::InvalidOrder(lambda))
        }
    }

    /// The raw value.
    pub fn get(self) -> f64 {
        self.0
    }

    /// The complementary order `1 - λ`.
    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

impl TryFrom<f64> for Order {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Order> for f64 {
    fn from(o: Order) -> f64 {
        o.0
    }
}

/// λ-weighted averages `β_λ` and `α_λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaWeights {
    /// `λ β_A + (1-λ) β_H`.
    pub beta_lambda: f64,
    /// `λ α_A + (1-λ) α_H`.
    pub alpha_lambda: f64,
}

/// Parameter-constellation class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// No immigration.
    NI,
    /// Proportional means: `α_A/α_H = β_A/β_H ≠ 1`.
    SP1,
    /// Equal immigration, different offspring.
    SP2,
    /// Crossing point `x* < 0` and `phi'(0) ≤ 0`.
    SP3a,
    /// Crossing point `x* < 0` and `phi'(0) > 0`.
    SP3b,
    /// Crossing point `x* > 0` not an integer.
    SP3c,
    /// Crossing point `x* > 0` an integer.
    SP3d,
    /// Equal offspring, different immigration.
    SP4,
}

impl CaseTag {
    /// All tags in canonical order.
    pub const ALL: [CaseTag; 8] = [
        CaseTag::NI,
        CaseTag::SP1,
        CaseTag::SP2,
        CaseTag::SP3a,
        CaseTag::SP3b,
        CaseTag::SP3c,
        CaseTag::SP3d,
        CaseTag::SP4,
    ];

    /// True where the Hellinger integral has a recursive exact value.
    pub fn has_exact(self) -> bool {
        matches!(self, CaseTag::NI | CaseTag::SP1)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseTag::NI => "NI",
            CaseTag::SP1 => "SP1",
            CaseTag::SP2 => "SP2",
            CaseTag::SP3a => "SP3a",
            CaseTag::SP3b => "SP3b",
            CaseTag::SP3c => "SP3c",
            CaseTag::SP3d => "SP3d",
            CaseTag::SP4 => "SP4",
        };
        f.write_str(s)
    }
}

/// Classification with the quantities that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// The case.
    pub case: CaseTag,
    /// Crossing point `(α_H - α_A)/(β_A - β_H)` where `f_A = f_H`, if defined.
    pub x_star: Option<f64>,
    /// `phi'(0)` when it decided between SP3a and SP3b.
    pub phi_prime_at_zero: Option<f64>,
    /// True if a ratio, sign or integrality test was settled by the tolerance.
    pub decided_by_tolerance: bool,
}

/// Classifies with the default tolerance.
pub fn classify(params: &ParamSet, lambda: Order) -> CaseTag {
    classify_detailed(params, lambda, CLASSIFY_TOL).case
}

/// Classifies with an explicit tolerance for the derived ratio, sign and integer tests.
pub fn classify_detailed(params: &ParamSet, lambda: Order, tol: f64) -> Classification {
    let p = params;
    let mk = |case, x_star, d0, tie| Classification {
        case,
        x_star,
        phi_prime_at_zero: d0,
        decided_by_tolerance: tie,
    };
    if p.is_no_immigration() {
        return mk(CaseTag::NI, None, None, false);
    }
    if p.beta_a == p.beta_h {
        return mk(CaseTag::SP4, None, None, false);
    }
    if p.alpha_a == p.alpha_h {
        return mk(CaseTag::SP2, Some(0.0), None, false);
    }
    let ratio_gap = p.alpha_a / p.alpha_h - p.beta_a / p.beta_h;
    if ratio_gap.abs() <= tol {
        return mk(CaseTag::SP1, None, None, ratio_gap != 0.0);
    }
    let x_star = (p.alpha_h - p.alpha_a) / (p.beta_a - p.beta_h);
    if x_star < 0.0 {
        let d0 = phi_prime_at_zero(p, lambda);
        if d0 <= tol {
            mk(CaseTag::SP3a, Some(x_star), Some(d0), d0 > 0.0)
        } else {
            mk(CaseTag::SP3b, Some(x_star), Some(d0), false)
        }
    } else {
        let off = (x_star - x_star.round()).abs();
        if off <= tol {
            mk(CaseTag::SP3d, Some(x_star.round()), None, off != 0.0)
        } else {
            mk(CaseTag::SP3c, Some(x_star), None, false)
        }
    }
}

/// `phi'(0)` written through the immigration ratio.
pub fn phi_prime_at_zero(params: &ParamSet, lambda: Order) -> f64 {
    let l = lambda.get();
    let rho = params.ratio(0.0);
    let w = params.weights(lambda);
    l * params.beta_a * rho.powf(l - 1.0) + (1.0 - l) * params.beta_h * rho.powf(l) - w.beta_lambda
}

/// Value and first two derivatives of `phi` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiEval {
    /// `phi(x)`.
    pub phi: f64,
    /// `phi'(x)`.
    pub phi_prime: f64,
    /// `phi''(x)`.
    pub phi_double_prime: f64,
}

/// `e^(λu) - 1 - λ(e^u - 1)`, evaluated without cancellation for small `u`.
pub(crate) fn power_mean_gap(u: f64, l: f64) -> f64 {
    if u.abs() < 1e-3 {
        // Σ_{k≥2} (λ^k - λ) u^k / k!
        let mut sum = 0.0;
        let mut lk = l;
        let mut uk = u;
        let mut fact = 1.0;
        for k in 2..=9 {
            lk *= l;
            uk *= u;
            fact *= k as f64;
            sum += (lk - l) * uk / fact;
        }
        sum
    } else {
        (l * u).exp_m1() - l * u.exp_m1()
    }
}

/// `varphi(x) = f_A(x)^λ f_H(x)^(1-λ)`, with `varphi(0) = 0` on the no-immigration family.
pub fn varphi(params: &ParamSet, lambda: Order, x: f64) -> f64 {
    let (fa, fh) = (params.f_a(x), params.f_h(x));
    if fa <= 0.0 || fh <= 0.0 {
        return 0.0;
    }
    let l = lambda.get();
    (l * fa.ln() + (1.0 - l) * fh.ln()).exp()
}

/// `phi(x) = varphi(x) - f_λ(x)`.
pub fn phi(params: &ParamSet, lambda: Order, x: f64) -> f64 {
    let fh = params.f_h(x);
    if fh <= 0.0 {
        return 0.0;
    }
    let u = params.ratio(x).ln();
    fh * power_mean_gap(u, lambda.get())
}

/// Evaluates `phi` and its first two derivatives at `x ≥ 0`.
pub fn phi_eval(params: &ParamSet, lambda: Order, x: f64) -> Result<PhiEval> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("evaluation point {x} must be finite and ≥ 0")));
    }
    let l = lambda.get();
    let w = params.weights(lambda);
    let r = params.ratio(x);
    let phi_prime =
        l * params.beta_a * r.powf(l - 1.0) + (1.0 - l) * params.beta_h * r.powf(l) - w.beta_lambda;
    let g = params.gamma();
    let phi_double_prime = if g == 0.0 {
        0.0
    } else {
        let (fa, fh) = (params.f_a(x), params.f_h(x));
        -l * (1.0 - l) * fa.powf(l - 2.0) * fh.powf(-l - 1.0) * g * g
    };
    Ok(PhiEval { phi: phi(params, lambda, x), phi_prime, phi_double_prime })
}

/// Weighted geometric versus arithmetic mean gap
/// `x^λ y^(1-λ) - (λ x z^(λ-1) + (1-λ) y z^λ)`; nonpositive, zero iff `x/y = z`.
pub fn lemma_gap(x: f64, y: f64, z: f64, lambda: Order) -> Result<f64> {
    if !(x > 0.0 && y > 0.0 && z > 0.0) {
        return Err(Error::InvalidInput("lemma_gap needs x, y, z > 0".into()));
    }
    let l = lambda.get();
    Ok(x.powf(l) * y.powf(1.0 - l) - (l * x * z.powf(l - 1.0) + (1.0 - l) * y * z.powf(l)))
}
