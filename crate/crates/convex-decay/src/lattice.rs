//! Exact lattice-point counts of dilated bodies and discrepancy profiles.
//!
//! `count_points` iterates over the leading integer coordinates and adds up
//! exact per-column ranges of the last coordinate, so every count is an
//! integer fact rather than a quadrature result. The discrepancy
//! N(k) − k^{n+1}·vol oscillates through zero, so its growth exponent is
//! fitted on the envelope: per half-decade bin maxima of |disc|, then least
//! squares in log-log.

use rayon::prelude::*;

use crate::checks::envelope_trend;
use crate::surface::body::SectionRule;
use crate::surface::ClosedBody;
use crate::{Error, Result};

/// Exact number of integer points on or inside the dilation k·K.
pub fn count_points(body: &ClosedBody, k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::Parameter("dilation must be positive".into()));
    }
    let rule = body.section_rule().ok_or_else(|| {
        Error::Unsupported(format!(
            "body '{}' carries no exact section rule",
            body.name()
        ))
    })?;
    let bound = (k as f64 * body.extent()).ceil() as i64 + 1;
    let column = |range: Option<(i64, i64)>| -> u64 {
        match range {
            Some((lo, hi)) if hi >= lo => (hi - lo + 1) as u64,
            _ => 0,
        }
    };
    let total = match rule {
        SectionRule::Planar(section) => (-bound..=bound)
            .map(|x| column(section(k, x)))
            .sum::<u64>(),
        SectionRule::Solid(section) => (-bound..=bound)
            .map(|x| {
                (-bound..=bound)
                    .map(|y| column(section(k, x, y)))
                    .sum::<u64>()
            })
            .sum::<u64>(),
    };
    Ok(total)
}

/// One dilation of a discrepancy profile.
#[derive(Clone, Copy, Debug)]
pub struct LatticeRow {
    pub k: u64,
    pub count: u64,
    /// k^{n+1} · volume.
    pub main: f64,
    /// count − main; oscillates through zero.
    pub disc: f64,
}

/// Counts along a dilation ladder together with the fitted envelope exponent
/// of |disc|.
#[derive(Clone, Debug)]
pub struct LatticeProfile {
    pub body_name: String,
    pub n: usize,
    pub rows: Vec<LatticeRow>,
    pub fitted_exponent: f64,
}

impl LatticeProfile {
    /// Number of sign changes of the discrepancy along the ladder (zeros do
    /// not interrupt a change). A systematic counting bias would freeze the
    /// sign.
    pub fn sign_changes(&self) -> usize {
        let mut changes = 0;
        let mut last = 0.0f64;
        for row in &self.rows {
            if row.disc != 0.0 {
                if last != 0.0 && row.disc.signum() != last.signum() {
                    changes += 1;
                }
                last = row.disc;
            }
        }
        changes
    }
}

/// Exact counts over `ks` and the envelope exponent of the discrepancy.
pub fn discrepancy_profile(body: &ClosedBody, ks: &[u64]) -> Result<LatticeProfile> {
    if ks.len() < 50 {
        return Err(Error::Parameter(format!(
            "a discrepancy profile needs at least 50 dilations, got {}",
            ks.len()
        )));
    }
    if ks[0] == 0 || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(
            "dilations must be positive and strictly increasing".into(),
        ));
    }
    let n = body.n();
    let volume = body.volume();
    let counts: Vec<Result<u64>> = ks.par_iter().map(|&k| count_points(body, k)).collect();
    let mut rows = Vec::with_capacity(ks.len());
    for (&k, count) in ks.iter().zip(counts) {
        let count = count?;
        let main = (k as f64).powi(n as i32 + 1) * volume;
        rows.push(LatticeRow {
            k,
            count,
            main,
            disc: count as f64 - main,
        });
    }
    let fitted_exponent = envelope_trend(rows.iter().map(|r| (r.k as f64, r.disc.abs())));
    Ok(LatticeProfile {
        body_name: body.name().to_string(),
        n,
        rows,
        fitted_exponent,
    })
}

/// Discrepancy exponent n − α/(n+1−α) implied by a uniform slab decay t^{−α}.
/// The theorem wants 0 < α < 1; α = n/2 is additionally accepted as the
/// classical reference value for smooth positively curved bodies.
pub fn predicted_exponent(n: usize, alpha: f64) -> Result<f64> {
    if n != 1 && n != 2 {
        return Err(Error::Parameter(format!("base dimension {n} not in {{1,2}}")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Parameter(format!(
            "decay exponent must be positive, got {alpha}"
        )));
    }
    if alpha >= 1.0 && alpha != n as f64 / 2.0 {
        return Err(Error::Parameter(format!(
            "decay exponent {alpha} outside (0, 1) and not the reference value {}",
            n as f64 / 2.0
        )));
    }
    let n = n as f64;
    Ok(n - alpha / (n + 1.0 - alpha))
}

/// Side-by-side of the measured envelope exponent and the one implied by a
/// slab decay exponent α for the same body.
#[derive(Clone, Copy, Debug)]
pub struct ExponentComparison {
    pub predicted: f64,
    pub empirical: f64,
    /// empirical ≤ predicted + 0.03.
    pub pass: bool,
}

pub fn compare_to_theorem(profile: &LatticeProfile, alpha: f64) -> Result<ExponentComparison> {
    let predicted = predicted_exponent(profile.n, alpha)?;
    let empirical = profile.fitted_exponent;
    Ok(ExponentComparison {
        predicted,
        empirical,
        pass: empirical <= predicted + 0.03,
    })
}

/// `count` strictly increasing, approximately log-spaced dilations; rounding
/// collisions at the low end are resolved by stepping to the next integer,
/// so the result always holds exactly `count` values.
pub fn log_spaced_ks(lo: u64, hi: u64, count: usize) -> Result<Vec<u64>> {
    if lo == 0 || hi <= lo || count < 2 {
        return Err(Error::Parameter(format!(
            "bad dilation ladder ({lo}, {hi}) × {count}"
        )));
    }
    if hi - lo + 1 < count as u64 {
        return Err(Error::Parameter(format!(
            "cannot fit {count} distinct dilations into [{lo}, {hi}]"
        )));
    }
    let (lo_f, hi_f) = (lo as f64, hi as f64);
    let mut ks = Vec::with_capacity(count);
    let mut prev = lo - 1;
    for i in 0..count {
        let u = i as f64 / (count - 1) as f64;
        let ideal = (lo_f * (hi_f / lo_f).powf(u)).round() as u64;
        // Never waste a slot: leave room for the remaining rungs.
        let cap = hi - (count - 1 - i) as u64;
        let k = ideal.max(prev + 1).min(cap);
        ks.push(k);
        prev = k;
    }
    Ok(ks)
}

/// Desk-scale ladder: 200 log-spaced dilations up to 5000 for plane bodies,
/// up to 300 for solids.
pub fn standard_ks(n: usize) -> Result<Vec<u64>> {
    match n {
        1 => log_spaced_ks(10, 5000, 200),
        _ => log_spaced_ks(5, 300, 200),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::catalog::{make_closed_body, BodyConfig};

    fn body(name: &str) -> ClosedBody {
        make_closed_body(&BodyConfig {
            name: name.into(),
            ..BodyConfig::default()
        })
        .unwrap()
    }

    /// Integer membership predicates, written per body straight from the
    /// defining inequalities — independent of the section rules.
    fn brute_count(name: &str, k: u64) -> u64 {
        let ki = k as i64;
        let solid: Option<Box<dyn Fn(i64, i64, i64) -> bool>> = match name {
            "ball" => Some(Box::new(move |x, y, z| x * x + y * y + z * z <= ki * ki)),
            "superellipsoid" => Some(Box::new(move |x, y, z| {
                let (x, y, z, k) = (x as i128, y as i128, z as i128, ki as i128);
                x.pow(4) + y.pow(4) + z.pow(4) <= k.pow(4)
            })),
            _ => None,
        };
        let b = 2 * ki + 1;
        let mut total = 0;
        if let Some(inside) = solid {
            for x in -b..=b {
                for y in -b..=b {
                    for z in -b..=b {
                        if inside(x, y, z) {
                            total += 1;
                        }
                    }
                }
            }
            return total;
        }
        let inside_plane: Box<dyn Fn(i64, i64) -> bool> = match name {
            "disk" => Box::new(move |x, y| x * x + y * y <= ki * ki),
            "superellipse" => Box::new(move |x, y| {
                let (x, y, k) = (x as i128, y as i128, ki as i128);
                x.pow(4) + y.pow(4) <= k.pow(4)
            }),
            // a = 2, b = 1: x²/4 + y² ≤ k².
            "ellipse" => Box::new(move |x, y| x * x + 4 * y * y <= 4 * ki * ki),
            // Disks of radius 1 at (±1/2, 0): (2x ∓ k)² + (2y)² ≤ (2k)².
            "two_disk_union" => Box::new(move |x, y| {
                let near = |s: i64| (2 * x - s * ki).pow(2) + (2 * y).pow(2) <= 4 * ki * ki;
                near(1) || near(-1)
            }),
            "square" => Box::new(move |x, y| x.abs() <= ki && y.abs() <= ki),
            other => panic!("no brute predicate for {other}"),
        };
        for x in -b..=b {
            for y in -b..=b {
                if inside_plane(x, y) {
                    total += 1;
                }
            }
        }
        total
    }

    #[test]
    fn counts_match_brute_force_enumeration() {
        let cases = [
            ("disk", BodyConfig::default()),
            ("superellipse", BodyConfig::default()),
            (
                "ellipse",
                BodyConfig {
                    a: Some(2.0),
                    b: Some(1.0),
                    ..BodyConfig::default()
                },
            ),
            ("two_disk_union", BodyConfig::default()),
            ("square", BodyConfig::default()),
            ("ball", BodyConfig::default()),
            ("superellipsoid", BodyConfig::default()),
        ];
        for (name, cfg) in cases {
            let body = make_closed_body(&BodyConfig {
                name: name.into(),
                ..cfg
            })
            .unwrap();
            for k in [1, 2, 3, 5, 10, 25] {
                assert_eq!(
                    count_points(&body, k).unwrap(),
                    brute_count(name, k),
                    "{name} at k={k}"
                );
            }
        }
    }

    #[test]
    fn frozen_counts_pin_the_section_rules() {
        let disk = body("disk");
        for (k, want) in [(1, 5), (2, 13), (3, 29), (5, 81), (10, 317), (25, 1961)] {
            assert_eq!(count_points(&disk, k).unwrap(), want);
        }
        let sup = body("superellipse");
        for (k, want) in [(1, 5), (2, 13), (5, 85), (10, 353)] {
            assert_eq!(count_points(&sup, k).unwrap(), want);
        }
        // k = 2 by hand: 26 in the two disks minus 5 shared in the lens;
        // k = 10: 2·317 minus a 127-point lens.
        let union = body("two_disk_union");
        for (k, want) in [(2, 21), (10, 507)] {
            assert_eq!(count_points(&union, k).unwrap(), want);
        }
        let square = body("square");
        for k in [1u64, 7, 40] {
            assert_eq!(count_points(&square, k).unwrap(), (2 * k + 1).pow(2));
        }
    }

    #[test]
    fn profile_converges_to_the_volume_and_oscillates() {
        let disk = body("disk");
        let ks = standard_ks(1).unwrap();
        let profile = discrepancy_profile(&disk, &ks).unwrap();
        assert!(profile
            .rows
            .windows(2)
            .all(|w| w[1].count >= w[0].count));
        let last = profile.rows.last().unwrap();
        let density = last.count as f64 / (last.k as f64).powi(2);
        assert!(
            (density - std::f64::consts::PI).abs() < 3.0 / last.k as f64,
            "density {density} at k={}",
            last.k
        );
        // Sign changes are rare (the integer-radius discrepancy is negative
        // ~99% of the time), so hunt for them on a dense linear ladder.
        let dense: Vec<u64> = (10..=5000).step_by(5).collect();
        let dense_profile = discrepancy_profile(&disk, &dense).unwrap();
        assert!(
            dense_profile.sign_changes() >= 10,
            "only {} sign changes",
            dense_profile.sign_changes()
        );
        assert!(
            profile.fitted_exponent > 0.4 && profile.fitted_exponent < 0.75,
            "disk envelope exponent {}",
            profile.fitted_exponent
        );
    }

    #[test]
    fn square_control_defeats_the_convex_prediction() {
        let square = body("square");
        let ks = standard_ks(1).unwrap();
        let profile = discrepancy_profile(&square, &ks).unwrap();
        // N(k) = (2k+1)², main = 4k², disc = 4k+1 exactly.
        assert!(
            (profile.fitted_exponent - 1.0).abs() < 0.02,
            "square exponent {}",
            profile.fitted_exponent
        );
        let verdict = compare_to_theorem(&profile, 0.5).unwrap();
        assert!(!verdict.pass);
    }

    #[test]
    fn predicted_exponents_hit_the_reference_values() {
        assert!((predicted_exponent(1, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((predicted_exponent(2, 1.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((predicted_exponent(1, 0.25).unwrap() - (1.0 - 0.25 / 1.75)).abs() < 1e-15);
        // α → 0⁺ approaches the trivial boundary bound kⁿ.
        assert!((predicted_exponent(1, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(predicted_exponent(1, 0.0).is_err());
        assert!(predicted_exponent(1, -0.5).is_err());
        assert!(predicted_exponent(1, 1.0).is_err());
        assert!(predicted_exponent(2, 1.2).is_err());
        assert!(predicted_exponent(3, 0.5).is_err());
    }

    #[test]
    fn ladders_are_strictly_increasing() {
        let ks = log_spaced_ks(10, 5000, 200).unwrap();
        assert!(ks.len() >= 50);
        assert_eq!(ks[0], 10);
        assert_eq!(*ks.last().unwrap(), 5000);
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert!(log_spaced_ks(0, 100, 50).is_err());
        assert!(log_spaced_ks(100, 100, 50).is_err());
        let short = vec![1u64, 2, 3];
        assert!(discrepancy_profile(&body("disk"), &short).is_err());
    }
}
