//! Phenomenological frequency response of the acoustic hardware: transducer
//! emission spectrum, Bragg-mirror reflectance, transit time and loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multimode::efficiency_bound;

/// Periodic electrode array (mirror grating or transducer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayParams {
    pub pitch_um: f64,
    pub cells: usize,
    /// Per-line reflectivity as `[re, im]`.
    pub reflectivity: [f64; 2],
    pub speed_km_s: f64,
}

impl ArrayParams {
    pub fn reflectivity_abs(&self) -> f64 {
        self.reflectivity[0].hypot(self.reflectivity[1])
    }

    /// v / p, in GHz.
    pub fn synchronous_ghz(&self) -> f64 {
        self.speed_km_s / self.pitch_um
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSurface {
    pub speed_km_s: f64,
    /// Amplitude attenuation, Np/m.
    pub loss_np_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SawGeometry {
    pub mirror: ArrayParams,
    pub idt: ArrayParams,
    pub free: FreeSurface,
    pub eff_mirror_distance_um: f64,
    /// Stored for completeness; no modeled quantity depends on it.
    pub aperture_um: f64,
    /// Stored for completeness; no modeled quantity depends on it.
    pub metallization_ratio: f64,
    /// Extra delay from wave penetration into transducer and mirrors, ns.
    pub penetration_delay_ns: f64,
    /// Stop-band center, GHz. Tunable because v/2p of the grating does not
    /// land on the measured band.
    pub mirror_center_ghz: f64,
}

impl Default for SawGeometry {
    fn default() -> Self {
        Self {
            mirror: ArrayParams { pitch_um: 0.5, cells: 400, reflectivity: [0.0, -0.049], speed_km_s: 3.928 },
            idt: ArrayParams { pitch_um: 0.985, cells: 20, reflectivity: [0.0, 0.009], speed_km_s: 3.911 },
            free: FreeSurface { speed_km_s: 4.034, loss_np_m: 70.0 },
            eff_mirror_distance_um: 2029.6,
            aperture_um: 75.0,
            metallization_ratio: 0.58,
            penetration_delay_ns: 5.0,
            mirror_center_ghz: 3.97,
        }
    }
}

impl SawGeometry {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mirror pitch", self.mirror.pitch_um),
            ("mirror speed", self.mirror.speed_km_s),
            ("idt pitch", self.idt.pitch_um),
            ("idt speed", self.idt.speed_km_s),
            ("free speed", self.free.speed_km_s),
            ("mirror distance", self.eff_mirror_distance_um),
            ("mirror center", self.mirror_center_ghz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameters(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mirror.cells == 0 || self.idt.cells == 0 {
            return Err(Error::InvalidParameters("arrays need at least one cell".into()));
        }
        for (name, a) in [("mirror", &self.mirror), ("idt", &self.idt)] {
            if a.reflectivity_abs() >= 1.0 {
                return Err(Error::InvalidParameters(format!("{name} |reflectivity| must be < 1")));
            }
        }
        if !(self.free.loss_np_m >= 0.0) || !(self.penetration_delay_ns >= 0.0) {
            return Err(Error::InvalidParameters("loss and penetration delay must be non-negative".into()));
        }
        Ok(())
    }

    /// Transducer center frequency, GHz.
    pub fn idt_center_ghz(&self) -> f64 {
        self.idt.synchronous_ghz()
    }
}

/// Emission rate κ(f) = κ_max·sinc²(Nπ(f − f₀)/f₀), same units as `kappa_max`.
pub fn idt_rate_spectrum(f_ghz: f64, g: &SawGeometry, kappa_max: f64) -> f64 {
    let f0 = g.idt_center_ghz();
    let x = g.idt.cells as f64 * std::f64::consts::PI * (f_ghz - f0) / f0;
    let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
    kappa_max * sinc * sinc
}

/// Power reflectance of the Bragg grating in the coupling-of-modes picture.
pub fn mirror_stopband(f_ghz: f64, g: &SawGeometry) -> f64 {
    let p = g.mirror.pitch_um;
    let fc = g.mirror_center_ghz;
    let k = g.mirror.reflectivity_abs() / p;
    let delta = std::f64::consts::PI * (f_ghz - fc) / (fc * p);
    let l = g.mirror.cells as f64 * p;
    if k == 0.0 {
        return 0.0;
    }
    let (k2, d2) = (k * k, delta * delta);
    if d2 < k2 {
        let s = (k2 - d2).sqrt();
        let sh = (s * l).sinh();
        // κ²sinh²/(s²cosh² + δ²sinh²), written to stay finite for large sL
        let th = (s * l).tanh();
        if sh.is_finite() {
            k2 * sh * sh / (s * s * (s * l).cosh().powi(2) + d2 * sh * sh)
        } else {
            k2 * th * th / (s * s + d2 * th * th)
        }
    } else if d2 == k2 {
        let kl = k * l;
        kl * kl / (1.0 + kl * kl)
    } else {
        let s = (d2 - k2).sqrt();
        let sn = (s * l).sin();
        k2 * sn * sn / (s * s * (s * l).cos().powi(2) + d2 * sn * sn)
    }
}

/// Full stop-band width 2|r|f_c/π, GHz.
pub fn stopband_width_ghz(g: &SawGeometry) -> f64 {
    2.0 * g.mirror.reflectivity_abs() * g.mirror_center_ghz / std::f64::consts::PI
}

/// Single-pass transit time τ, ns.
pub fn transit_time(g: &SawGeometry) -> f64 {
    g.eff_mirror_distance_um / g.free.speed_km_s + g.penetration_delay_ns
}

/// ν_FSR = 1/τ, MHz.
pub fn free_spectral_range_mhz(g: &SawGeometry) -> f64 {
    1e3 / transit_time(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBudget {
    pub t1_saw_us: f64,
    pub quality_factor: f64,
    pub eta_bound: f64,
}

/// Energy lifetime from propagation loss, quality factor at `f_ghz`, and the
/// single-transit efficiency bound.
pub fn loss_budget(g: &SawGeometry, f_ghz: f64) -> LossBudget {
    // amplitude Np/m → energy rate 2αv, in 1/µs with v in m/µs
    let v_m_per_us = g.free.speed_km_s * 1e3 * 1e-6;
    let rate = 2.0 * g.free.loss_np_m * v_m_per_us;
    let t1_saw_us = if rate > 0.0 { 1.0 / rate } else { f64::INFINITY };
    LossBudget {
        t1_saw_us,
        quality_factor: 2.0 * std::f64::consts::PI * f_ghz * 1e3 * t1_saw_us,
        eta_bound: efficiency_bound(transit_time(g), t1_saw_us),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idt_center_and_null() {
        let g = SawGeometry::default();
        assert!((g.idt_center_ghz() - 3.9706).abs() < 1e-4);
        assert_eq!(idt_rate_spectrum(g.idt_center_ghz(), &g, 0.13), 0.13);
        let null = g.idt_center_ghz() * (1.0 + 1.0 / 20.0);
        assert!((null - 4.17).abs() < 0.01);
        assert!(idt_rate_spectrum(null, &g, 1.0) < 1e-20);
        // the response just before the null is still decreasing
        assert!(idt_rate_spectrum(null - 0.01, &g, 1.0) > idt_rate_spectrum(null - 0.005, &g, 1.0));
    }

    #[test]
    fn idt_symmetric_nonnegative() {
        let g = SawGeometry::default();
        let f0 = g.idt_center_ghz();
        for i in 0..200 {
            let d = i as f64 * 0.0025;
            let (a, b) = (idt_rate_spectrum(f0 + d, &g, 1.0), idt_rate_spectrum(f0 - d, &g, 1.0));
            assert!(a >= 0.0 && (a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mirror_band() {
        let g = SawGeometry::default();
        assert!(mirror_stopband(3.97, &g) >= 0.999);
        let w = stopband_width_ghz(&g);
        assert!((w - 0.124).abs() < 0.001);
        assert!(mirror_stopband(3.47, &g) <= 0.05);
        assert!(mirror_stopband(4.47, &g) <= 0.05);
    }

    #[test]
    fn mirror_monotone_in_first_lobe() {
        let g = SawGeometry::default();
        let fc = g.mirror_center_ghz;
        let k = g.mirror.reflectivity_abs() / g.mirror.pitch_um;
        let l = g.mirror.cells as f64 * g.mirror.pitch_um;
        // first zero outside the band: sqrt(δ² − κ²)L = π
        let dz = (k * k + (std::f64::consts::PI / l).powi(2)).sqrt();
        let fz = dz * fc * g.mirror.pitch_um / std::f64::consts::PI;
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let f = fc + fz * i as f64 / 400.0;
            let r = mirror_stopband(f, &g);
            assert!(r <= prev + 1e-12, "f={f}");
            prev = r;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn transit_and_fsr() {
        let g = SawGeometry::default();
        assert!(((g.eff_mirror_distance_um / g.free.speed_km_s) - 503.1).abs() < 0.05);
        assert!((transit_time(&g) - 508.1).abs() < 0.1);
        assert!((free_spectral_range_mhz(&g) - 1.97).abs() < 0.005);
        assert!((transit_time(&g) * free_spectral_range_mhz(&g) * 1e-3 - 1.0).abs() < 1e-15);
        let mut g2 = g.clone();
        g2.eff_mirror_distance_um *= 2.0;
        g2.penetration_delay_ns = 0.0;
        let mut g1 = g;
        g1.penetration_delay_ns = 0.0;
        assert!((transit_time(&g2) - 2.0 * transit_time(&g1)).abs() < 1e-12);
    }

    #[test]
    fn losses() {
        let g = SawGeometry::default();
        let b = loss_budget(&g, 3.97);
        assert!((b.t1_saw_us - 1.77).abs() < 0.01);
        assert!(b.quality_factor > 4e4 && b.quality_factor < 6e4);
        assert!((b.quality_factor - 2.0 * std::f64::consts::PI * 3.97e3 * b.t1_saw_us).abs() < 1e-9);
        let mut lossless = g;
        lossless.free.loss_np_m = 0.0;
        let b = loss_budget(&lossless, 3.97);
        assert!(b.t1_saw_us.is_infinite() && b.eta_bound == 1.0);
    }

    #[test]
    fn validation() {
        let mut g = SawGeometry::default();
        assert!(g.validate().is_ok());
        g.mirror.reflectivity = [0.0, 1.2];
        assert!(g.validate().is_err());
    }
}
