//! One-variable profile functions with analytic first derivatives.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ScalarProfile {
    Constant { value: f64 },
    /// `slope·r + offset`
    Linear { slope: f64, offset: f64 },
    /// `amp·r·(1 + stiff·r²)^(-1/2)`
    Kink { amp: f64, stiff: f64 },
    /// `amp·(1 + stiff·(r - center)²)^(-1/2)`
    Bump { amp: f64, stiff: f64, center: f64 },
    /// `amp·sech(rate·r)`
    Sech { amp: f64, rate: f64 },
    /// `amp·tanh(rate·r)`
    Tanh { amp: f64, rate: f64 },
    /// `amp·(base + stiff·cosh(rate·(r - center)))^(-1/2)`
    CoshRoot {
        amp: f64,
        base: f64,
        stiff: f64,
        rate: f64,
        center: f64,
    },
    /// `amp·(1 + exp(rate·r))^(-1/2)`
    ExpStep { amp: f64, rate: f64 },
    /// `amp·(1 - depth·cos(freq·r))^(-1/2)`
    Periodic { amp: f64, depth: f64, freq: f64 },
}

impl ScalarProfile {
    /// Value and first derivative at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            Self::Constant { value } => (value, 0.0),
            Self::Linear { slope, offset } => (slope * r + offset, slope),
            Self::Kink { amp, stiff } => {
                let q = 1.0 + stiff * r * r;
                let s = q.sqrt();
                (amp * r / s, amp / (q * s))
            }
            Self::Bump { amp, stiff, center } => {
                let d = r - center;
                let q = 1.0 + stiff * d * d;
                let s = q.sqrt();
                (amp / s, -amp * stiff * d / (q * s))
            }
            Self::Sech { amp, rate } => {
                let sech = 1.0 / (rate * r).cosh();
                (amp * sech, -amp * rate * sech * (rate * r).tanh())
            }
            Self::Tanh { amp, rate } => {
                let th = (rate * r).tanh();
                (amp * th, amp * rate * (1.0 - th * th))
            }
            Self::CoshRoot {
                amp,
                base,
                stiff,
                rate,
                center,
            } => {
                let z = rate * (r - center);
                let q = base + stiff * z.cosh();
                let s = q.sqrt();
                (amp / s, -0.5 * amp * stiff * rate * z.sinh() / (q * s))
            }
            Self::ExpStep { amp, rate } => {
                let e = (rate * r).exp();
                let q = 1.0 + e;
                let s = q.sqrt();
                (amp / s, -0.5 * amp * rate * e / (q * s))
            }
            Self::Periodic { amp, depth, freq } => {
                let q = 1.0 - depth * (freq * r).cos();
                let s = q.sqrt();
                (amp / s, -0.5 * amp * depth * freq * (freq * r).sin() / (q * s))
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// Whether the profile is bounded on the whole line.
    pub fn is_bounded(&self) -> bool {
        match *self {
            Self::Linear { slope, .. } => slope == 0.0,
            Self::Kink { stiff, .. } | Self::Bump { stiff, .. } => stiff > 0.0,
            _ => true,
        }
    }
}
