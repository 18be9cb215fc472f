use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Smoothness gap `t` entering `ε = t/d − (1/p − 1/q) − α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gap {
    /// Gradient against `L^q`: `t = 1`.
    One,
    /// Triebel–Lizorkin seminorm against `L^q`: `t = s`.
    S,
    /// Gradient against the seminorm: `t = 1 − s`.
    OneMinusS,
}

/// The exponent tuple shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub alpha: f64,
    pub u: f64,
    pub p0: f64,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        Self {
            d: 1,
            p: 2.0,
            q: 2.0,
            r: 2.0,
            s: 0.5,
            alpha: 0.0,
            u: 1.0,
            p0: 1.0,
        }
    }
}

/// `1/x'` for `x ∈ [1, ∞]`; zero at `x = 1`.
pub fn inv_conjugate(x: f64) -> f64 {
    if x.is_infinite() {
        1.0
    } else {
        1.0 - 1.0 / x
    }
}

/// `x'`, infinite at `x = 1`.
pub fn conjugate(x: f64) -> f64 {
    if x == 1.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        1.0
    } else {
        x / (x - 1.0)
    }
}

impl ExponentConfig {
    pub fn new(d: usize, p: f64, q: f64) -> Self {
        Self {
            d,
            p,
            q,
            ..Self::default()
        }
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn with_p0(mut self, p0: f64) -> Self {
        self.p0 = p0;
        self
    }

    pub fn p_prime(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn q_prime(&self) -> f64 {
        conjugate(self.q)
    }

    /// `1/p₁ = 1 + 1/p − 1/p₀`.
    pub fn p1(&self) -> f64 {
        1.0 / (1.0 + 1.0 / self.p - 1.0 / self.p0)
    }

    pub fn p1_prime(&self) -> f64 {
        conjugate(self.p1())
    }

    /// `ε = t/d − (1/p − 1/q) − α`.
    pub fn eps(&self, gap: Gap) -> f64 {
        let t = match gap {
            Gap::One => 1.0,
            Gap::S => self.s,
            Gap::OneMinusS => 1.0 - self.s,
        };
        t / self.d as f64 - (1.0 / self.p - 1.0 / self.q) - self.alpha
    }

    /// `β = α + 1/p − 1/q`.
    pub fn beta(&self) -> f64 {
        self.alpha + 1.0 / self.p - 1.0 / self.q
    }

    /// `γ = min{q, r}`.
    pub fn gamma(&self) -> f64 {
        self.q.min(self.r)
    }

    /// Upper end of the admissible `α` range, `1/q + 1/p′`.
    pub fn alpha_cap(&self) -> f64 {
        1.0 / self.q + inv_conjugate(self.p)
    }

    /// Checks every structural constraint, naming the first that fails.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.p, self.q, self.r, self.s, self.alpha, self.u, self.p0];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(param("exponents must be finite"));
        }
        if !(1..=2).contains(&self.d) {
            return Err(param(format!("d must be 1 or 2, got {}", self.d)));
        }
        if self.p < 1.0 {
            return Err(param(format!("requires p ≥ 1, got p = {}", self.p)));
        }
        if self.p > self.q {
            return Err(param(format!(
                "requires p ≤ q, got p = {} and q = {}",
                self.p, self.q
            )));
        }
        if self.r < 1.0 {
            return Err(param(format!("requires r ≥ 1, got r = {}", self.r)));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(param(format!("requires 0 < s < 1, got s = {}", self.s)));
        }
        if !(self.alpha >= 0.0 && self.alpha < self.alpha_cap()) {
            return Err(param(format!(
                "requires 0 ≤ α < 1/q + 1/p′ = {}, got α = {}",
                self.alpha_cap(),
                self.alpha
            )));
        }
        if self.u < 1.0 {
            return Err(param(format!("requires u ≥ 1, got u = {}", self.u)));
        }
        if !(self.p0 >= 1.0 && self.p0 <= self.p) {
            return Err(param(format!(
                "requires 1 ≤ p₀ ≤ p, got p₀ = {} and p = {}",
                self.p0, self.p
            )));
        }
        if self.beta() >= 1.0 {
            return Err(param(format!(
                "requires β = α + 1/p − 1/q < 1, got {}",
                self.beta()
            )));
        }
        Ok(())
    }
}
