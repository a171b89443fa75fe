use super::TcpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlavorKind {
    Reno,
    Cubic,
}

impl FlavorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlavorKind::Reno => "reno",
            FlavorKind::Cubic => "cubic",
        }
    }
}

/// Congestion control flavor: the decrease ratio and, for CUBIC, the growth
/// curve scale (segments per second cubed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcpFlavor {
    pub kind: FlavorKind,
    pub beta: f64,
    pub cubic_scale: f64,
}

impl TcpFlavor {
    pub const RENO_BETA: f64 = 0.5;
    pub const CUBIC_BETA: f64 = 0.7;
    pub const CUBIC_SCALE: f64 = 0.4;

    pub fn reno() -> Self {
        TcpFlavor {
            kind: FlavorKind::Reno,
            beta: Self::RENO_BETA,
            cubic_scale: Self::CUBIC_SCALE,
        }
    }

    pub fn cubic() -> Self {
        TcpFlavor {
            kind: FlavorKind::Cubic,
            beta: Self::CUBIC_BETA,
            cubic_scale: Self::CUBIC_SCALE,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "reno" => Some(Self::reno()),
            "cubic" => Some(Self::cubic()),
            _ => None,
        }
    }

    /// Same flavor with a custom decrease ratio.
    pub fn with_beta(self, beta: f64) -> Result<Self, TcpError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(TcpError::InvalidBeta(beta));
        }
        Ok(TcpFlavor { beta, ..self })
    }

    pub fn with_cubic_scale(self, scale: f64) -> Result<Self, TcpError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(TcpError::InvalidCubicScale(scale));
        }
        Ok(TcpFlavor {
            cubic_scale: scale,
            ..self
        })
    }
}

/// Time in seconds for the cubic curve to climb back to `w_max` after a
/// decrease to `beta * w_max` (window in segments).
pub fn cubic_k(w_max_segments: f64, beta: f64, cubic_scale: f64) -> f64 {
    (w_max_segments * (1.0 - beta) / cubic_scale).cbrt()
}

/// CUBIC window in bytes `t` seconds after a decrease from `w_max` bytes.
///
/// The curve is evaluated in segments, `scale * (t - K)^3 + w_max`, and
/// converted back to bytes.
pub fn cubic_window(t: f64, w_max: f64, beta: f64, cubic_scale: f64, mss: u64) -> f64 {
    let mss = mss as f64;
    let w_max_seg = w_max / mss;
    let k = cubic_k(w_max_seg, beta, cubic_scale);
    let d = t - k;
    (cubic_scale * d * d * d + w_max_seg) * mss
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MSS: u64 = 1500;

    #[test]
    fn flavor_betas() {
        assert_eq!(TcpFlavor::reno().beta, 0.5);
        assert_eq!(TcpFlavor::cubic().beta, 0.7);
        assert_eq!(TcpFlavor::by_name("cubic"), Some(TcpFlavor::cubic()));
        assert_eq!(TcpFlavor::by_name("vegas"), None);
        assert_eq!(TcpFlavor::reno().with_beta(1.3), Err(TcpError::InvalidBeta(1.3)));
    }

    #[test]
    fn k_for_hundred_segments() {
        // independent scalar evaluation of cbrt(100 * 0.3 / 0.4) = cbrt(75)
        let k = cubic_k(100.0, 0.7, 0.4);
        assert!((k - 75f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((k - 4.217_163_326_508_746).abs() < 1e-12);
    }

    #[test]
    fn window_at_zero_and_at_k() {
        let w_max = 100.0 * MSS as f64;
        let at_zero = cubic_window(0.0, w_max, 0.7, 0.4, MSS);
        assert!((at_zero - 0.7 * w_max).abs() < 1e-6);
        let k = cubic_k(100.0, 0.7, 0.4);
        let at_k = cubic_window(k, w_max, 0.7, 0.4, MSS);
        assert!((at_k - w_max).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn window_is_continuous_and_increasing(
            w in 2.0f64..5000.0,
            t in 0.0f64..30.0,
        ) {
            let w_max = w * MSS as f64;
            let a = cubic_window(t, w_max, 0.7, 0.4, MSS);
            let b = cubic_window(t + 1e-6, w_max, 0.7, 0.4, MSS);
            prop_assert!(b >= a);
            // slope bound of the cubic over [t, t + dt]
            let k = cubic_k(w, 0.7, 0.4);
            let d = (t - k).abs().max((t + 1e-6 - k).abs());
            let bound = 3.0 * 0.4 * d * d * MSS as f64 * 1e-6 + 1e-6;
            prop_assert!(b - a <= bound, "jump of {} bytes, bound {}", b - a, bound);
        }
    }
}
