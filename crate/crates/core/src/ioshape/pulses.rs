use serde::{Deserialize, Serialize};

/// Unit-power hyperbolic-secant output envelope √(κ_c/4)·sech(κ_c t/2).
pub fn sech_envelope(t: f64, kappa_c: f64) -> f64 {
    (kappa_c / 4.0).sqrt() / (kappa_c * t / 2.0).cosh()
}

/// Full width at half maximum of the sech² power profile, ns.
pub fn sech_power_fwhm(kappa_c: f64) -> f64 {
    // sech²(x) = 1/2 at x = acosh(√2)
    4.0 * 2f64.sqrt().acosh() / kappa_c
}

/// Coupling that releases the whole excitation as a sech packet centered at
/// t = 0: κ_c e^{κ_c t}/(1 + e^{κ_c t}).
pub fn kappa_release_full(t: f64, kappa_c: f64) -> f64 {
    kappa_release_partial(t, kappa_c, 1.0)
}

/// Coupling that releases a fraction `alpha` of the excitation:
/// κ_c·α/(1 + (1−α)e^{κ_c t})·e^{κ_c t}/(1 + e^{κ_c t}).
pub fn kappa_release_partial(t: f64, kappa_c: f64, alpha: f64) -> f64 {
    let x = kappa_c * t;
    if x <= 0.0 {
        let e = x.exp();
        kappa_c * alpha / (1.0 + (1.0 - alpha) * e) * e / (1.0 + e)
    } else {
        // same expression in e^{−x} so large positive times stay finite
        let e = (-x).exp();
        kappa_c * alpha * e / (e + (1.0 - alpha)) / (1.0 + e)
    }
}

/// One coupling pulse with finite support `[start, end]`. `center` is the
/// sech center in the un-reversed frame; a reversed pulse is the mirror image
/// about the midpoint of its support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaPulse {
    pub start: f64,
    pub end: f64,
    pub center: f64,
    pub kappa_c: f64,
    pub alpha: f64,
    pub reversed: bool,
}

impl KappaPulse {
    /// Release centered at `center`, active on `[center − lead, center + tail]`.
    pub fn release(center: f64, kappa_c: f64, alpha: f64, lead: f64, tail: f64) -> Self {
        Self { start: center - lead, end: center + tail, center, kappa_c, alpha, reversed: false }
    }

    /// Time-reversed release, so that an incoming sech packet centered at
    /// `center` is absorbed; active on `[center − tail, center + lead]`.
    pub fn capture(center: f64, kappa_c: f64, alpha: f64, lead: f64, tail: f64) -> Self {
        Self::release(center - tail + lead, kappa_c, alpha, lead, tail).time_reverse()
    }

    /// Mirror about the midpoint of the support.
    pub fn time_reverse(&self) -> Self {
        Self { reversed: !self.reversed, ..*self }
    }

    pub fn shifted(&self, dt: f64) -> Self {
        Self { start: self.start + dt, end: self.end + dt, center: self.center + dt, ..*self }
    }

    /// Time where the reversed or forward packet peaks.
    pub fn packet_center(&self) -> f64 {
        if self.reversed {
            self.start + self.end - self.center
        } else {
            self.center
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    pub fn at(&self, t: f64) -> f64 {
        if !self.contains(t) {
            return 0.0;
        }
        let u = if self.reversed { self.start + self.end - t } else { t };
        kappa_release_partial(u - self.center, self.kappa_c, self.alpha)
    }
}
