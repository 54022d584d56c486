//! Smooth compactly supported cutoffs built from the `e^{-1/u}` step.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutoffKind {
    Theta,
    Phi,
}

/// Even bump equal to 1 on `[-plateau, plateau]` and 0 outside
/// `(-support, support)`; the `d`-dimensional cutoff is the product over
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpCutoff {
    kind: CutoffKind,
    plateau: f64,
    support: f64,
}

impl BumpCutoff {
    /// Plateau `1/8`, support `1/4`.
    pub const fn theta() -> Self {
        Self {
            kind: CutoffKind::Theta,
            plateau: 0.125,
            support: 0.25,
        }
    }

    /// Plateau `1/4`, support `1/2`.
    pub const fn phi() -> Self {
        Self {
            kind: CutoffKind::Phi,
            plateau: 0.25,
            support: 0.5,
        }
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn eval_1d(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= self.plateau {
            1.0
        } else if a >= self.support {
            0.0
        } else {
            smooth_step((self.support - a) / (self.support - self.plateau))
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| self.eval_1d(v)).product()
    }
}

fn glue(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// `g(u) / (g(u) + g(1 - u))`: 0 for `u <= 0`, 1 for `u >= 1`, smooth between.
pub fn smooth_step(u: f64) -> f64 {
    let a = glue(u);
    let b = glue(1.0 - u);
    a / (a + b)
}

/// Free-function form of [`BumpCutoff::eval`].
pub fn eval_cutoff(cut: BumpCutoff, x: &[f64]) -> f64 {
    cut.eval(x)
}
