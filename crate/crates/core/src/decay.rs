//! Forward decay functions.
//!
//! An item arriving at `t_i` carries raw weight `g(t_i - L)` for a landmark
//! `L`; measured at time `t` its weight is `g(t_i - L) / g(t - L)`. Sketches
//! accumulate raw weights and normalize only when queried.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayKind<F> {
    /// `g(n) = (1/lambda)^n`, `0 < lambda < 1`.
    Exponential { lambda: F },
    /// `g(n) = n^beta`, `beta > 0`.
    Polynomial { beta: F },
}

/// A decay function together with its landmark time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySpec<F> {
    kind: DecayKind<F>,
    landmark: f64,
}

impl<F: Scalar> DecaySpec<F> {
    pub fn exponential(lambda: f64, landmark: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::config(format!("lambda must lie in (0,1), got {lambda}")));
        }
        Self::with_landmark(DecayKind::Exponential { lambda: F::of(lambda) }, landmark)
    }

    pub fn polynomial(beta: f64, landmark: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::config(format!("beta must be positive, got {beta}")));
        }
        Self::with_landmark(DecayKind::Polynomial { beta: F::of(beta) }, landmark)
    }

    fn with_landmark(kind: DecayKind<F>, landmark: f64) -> Result<Self> {
        if !landmark.is_finite() {
            return Err(Error::config("landmark must be finite"));
        }
        Ok(Self { kind, landmark })
    }

    pub fn kind(&self) -> DecayKind<F> {
        self.kind
    }

    pub fn landmark(&self) -> f64 {
        self.landmark
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.kind, DecayKind::Exponential { .. })
    }

    /// `g(n)` for `n >= 0`.
    fn g(&self, n: f64) -> F {
        match self.kind {
            DecayKind::Exponential { lambda } => lambda.recip().powf(F::of(n)),
            DecayKind::Polynomial { beta } => F::of(n).powf(beta),
        }
    }

    /// Unnormalized weight `g(t_i - L)` of an arrival at `t_i`.
    pub fn raw_weight(&self, t_i: f64) -> Result<F> {
        if t_i.is_nan() || t_i < self.landmark {
            return Err(Error::BeforeLandmark { t: t_i, landmark: self.landmark });
        }
        let x = self.g(t_i - self.landmark);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Overflow { t: t_i })
        }
    }

    /// Weight in `[0, 1]` of an arrival at `t_i` measured at time `t`.
    pub fn normalized_weight(&self, t_i: f64, t: f64) -> Result<F> {
        if t_i > t {
            return Err(Error::FutureItem { item: t_i, at: t });
        }
        let num = self.raw_weight(t_i)?;
        if t_i == t {
            // covers g(0) = 0 for polynomial decay
            return Ok(F::one());
        }
        let den = self.raw_weight(t)?;
        Ok(num / den)
    }

    /// Factor `lambda^(new_landmark - L)` that moves raw weights from the
    /// current landmark to `new_landmark`. Exponential decay only.
    pub fn rebase_factor(&self, new_landmark: f64) -> Result<F> {
        let DecayKind::Exponential { lambda } = self.kind else {
            return Err(Error::Unsupported("landmark rebase requires exponential decay"));
        };
        if !new_landmark.is_finite() || new_landmark < self.landmark {
            return Err(Error::InvalidArgument(format!(
                "new landmark {new_landmark} must not precede {}",
                self.landmark
            )));
        }
        Ok(lambda.powf(F::of(new_landmark - self.landmark)))
    }

    /// Returns the factor and moves the landmark.
    pub fn rebase(&mut self, new_landmark: f64) -> Result<F> {
        let factor = self.rebase_factor(new_landmark)?;
        self.landmark = new_landmark;
        Ok(factor)
    }
}
