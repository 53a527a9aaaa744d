//! Named construction of the standard patches and closed bodies.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::surface::{body, ClosedBody, ConvexPatch};
use crate::{Error, Result};

/// Patch selection by name with optional shape parameters.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PatchConfig {
    pub name: String,
    /// Exponent for the power-type patches (even integer ≥ 2).
    pub p: Option<f64>,
    pub r0: Option<f64>,
}

/// Body selection by name with optional shape parameters.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct BodyConfig {
    pub name: String,
    pub p: Option<f64>,
    /// Ellipse semi-axes.
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Center offset of the two-disk union (disks of radius 1 at ±d).
    pub d: Option<f64>,
}

pub const PATCH_NAMES: [&str; 7] = [
    "power",
    "paraboloid",
    "anisotropic",
    "cone_patch",
    "circle_cap",
    "sphere_cap",
    "superellipse_cap",
];

pub const BODY_NAMES: [&str; 7] = [
    "disk",
    "ellipse",
    "superellipse",
    "two_disk_union",
    "ball",
    "superellipsoid",
    "square",
];

pub(crate) fn even_exponent(p: Option<f64>, default: f64) -> Result<f64> {
    let p = p.unwrap_or(default);
    if !(p.is_finite() && p >= 2.0 && p.fract() == 0.0 && (p as i64) % 2 == 0) {
        return Err(Error::Parameter(format!(
            "exponent must be an even integer at least 2, got {p}"
        )));
    }
    Ok(p)
}

fn radius(r0: Option<f64>, default: f64, max: f64) -> Result<f64> {
    let r = r0.unwrap_or(default);
    if !(r.is_finite() && r > 0.0 && r < max) {
        return Err(Error::Parameter(format!(
            "patch radius must lie in (0, {max}), got {r}"
        )));
    }
    Ok(r)
}

pub fn make_catalog_patch(cfg: &PatchConfig) -> Result<ConvexPatch> {
    match cfg.name.as_str() {
        "power" => {
            let p = even_exponent(cfg.p, 2.0)?;
            let r0 = radius(cfg.r0, 1.0, f64::INFINITY)?;
            let k = p as i32;
            ConvexPatch::new(
                1,
                r0,
                "power",
                true,
                Arc::new(move |x: [f64; 2]| x[0].powi(k)),
                Arc::new(move |x: [f64; 2]| [p * x[0].powi(k - 1), 0.0]),
            )
        }
        "paraboloid" => {
            let r0 = radius(cfg.r0, 1.0, f64::INFINITY)?;
            ConvexPatch::new(
                2,
                r0,
                "paraboloid",
                true,
                Arc::new(|x: [f64; 2]| x[0] * x[0] + x[1] * x[1]),
                Arc::new(|x: [f64; 2]| [2.0 * x[0], 2.0 * x[1]]),
            )
        }
        "anisotropic" => {
            let r0 = radius(cfg.r0, 1.0, f64::INFINITY)?;
            ConvexPatch::new(
                2,
                r0,
                "anisotropic",
                true,
                Arc::new(|x: [f64; 2]| x[0] * x[0] + x[1] * x[1] * x[1] * x[1]),
                Arc::new(|x: [f64; 2]| [2.0 * x[0], 4.0 * x[1] * x[1] * x[1]]),
            )
        }
        "cone_patch" => {
            // Graph chart of a rounded cone away from its apex: one flat
            // (ruling) direction, one curved direction, Hessian rank 1.
            let r0 = radius(cfg.r0, 0.5, 2.0)?;
            const C: f64 = std::f64::consts::SQRT_2 / 4.0;
            const A: f64 = 1.5;
            const B: f64 = std::f64::consts::FRAC_1_SQRT_2;
            ConvexPatch::new(
                2,
                r0,
                "cone_patch",
                true,
                Arc::new(|x: [f64; 2]| C * x[1] * x[1] / (A + B * x[0])),
                Arc::new(|x: [f64; 2]| {
                    let den = A + B * x[0];
                    [-C * B * x[1] * x[1] / (den * den), 2.0 * C * x[1] / den]
                }),
            )
        }
        "circle_cap" => {
            let r0 = radius(cfg.r0, 0.83, 1.0)?;
            ConvexPatch::new(
                1,
                r0,
                "circle_cap",
                true,
                Arc::new(|x: [f64; 2]| 1.0 - (1.0 - x[0] * x[0]).sqrt()),
                Arc::new(|x: [f64; 2]| [x[0] / (1.0 - x[0] * x[0]).sqrt(), 0.0]),
            )
        }
        "sphere_cap" => {
            let r0 = radius(cfg.r0, 0.83, 1.0)?;
            ConvexPatch::new(
                2,
                r0,
                "sphere_cap",
                true,
                Arc::new(|x: [f64; 2]| 1.0 - (1.0 - x[0] * x[0] - x[1] * x[1]).sqrt()),
                Arc::new(|x: [f64; 2]| {
                    let root = (1.0 - x[0] * x[0] - x[1] * x[1]).sqrt();
                    [x[0] / root, x[1] / root]
                }),
            )
        }
        "superellipse_cap" => {
            let p = even_exponent(cfg.p, 4.0)?;
            let r0 = radius(cfg.r0, 0.9, 1.0)?;
            let k = p as i32;
            ConvexPatch::new(
                1,
                r0,
                "superellipse_cap",
                true,
                Arc::new(move |x: [f64; 2]| 1.0 - (1.0 - x[0].powi(k)).powf(1.0 / p)),
                Arc::new(move |x: [f64; 2]| {
                    [
                        x[0].powi(k - 1) * (1.0 - x[0].powi(k)).powf(1.0 / p - 1.0),
                        0.0,
                    ]
                }),
            )
        }
        other => Err(Error::UnknownName(format!("patch '{other}'"))),
    }
}

pub fn make_closed_body(cfg: &BodyConfig) -> Result<ClosedBody> {
    match cfg.name.as_str() {
        "disk" => body::make_disk(),
        "ellipse" => body::make_ellipse(cfg.a.unwrap_or(1.0), cfg.b.unwrap_or(0.25)),
        "superellipse" => body::make_superellipse(even_exponent(cfg.p, 4.0)?),
        "two_disk_union" => body::make_two_disk_union(cfg.d.unwrap_or(0.5)),
        "ball" => body::make_ball(),
        "superellipsoid" => body::make_superellipsoid(even_exponent(cfg.p, 4.0)?),
        "square" => Ok(body::make_square()),
        other => Err(Error::UnknownName(format!("body '{other}'"))),
    }
}
