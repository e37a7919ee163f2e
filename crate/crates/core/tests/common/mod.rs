#![allow(dead_code)]

use num_complex::Complex64;
use wbnf_core::dictionary::RingPolicy;
use wbnf_core::{ArrayConfig, WidebandConfig};

pub const FC: f64 = 28e9;

/// Small recovery configuration: 33 elements, 64 subcarriers over 1.024 GHz.
pub fn recovery_desk() -> (ArrayConfig, WidebandConfig, RingPolicy) {
    let array = ArrayConfig::half_wavelength(33, FC).unwrap();
    let wb = WidebandConfig::new(64, 16e6, 8).unwrap();
    let policy = RingPolicy::new(0.5, &array).unwrap();
    (array, wb, policy)
}

/// The configuration used for MUSIC and the NMSE sweep.
pub fn music_desk() -> (ArrayConfig, WidebandConfig, RingPolicy) {
    let array = ArrayConfig::half_wavelength(101, FC).unwrap();
    let wb = WidebandConfig::new(32, 3.84e6, 100).unwrap();
    let policy = RingPolicy::new(0.5, &array).unwrap();
    (array, wb, policy)
}

pub fn paper_array() -> ArrayConfig {
    ArrayConfig::half_wavelength(127, FC).unwrap()
}

pub fn paper_wideband() -> WidebandConfig {
    WidebandConfig::new(256, 480e3, 100).unwrap()
}

pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
