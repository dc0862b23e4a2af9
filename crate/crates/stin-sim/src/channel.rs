//! Link-level channel model: annulus geometry, pathloss, small-scale fading,
//! SINR composition, and the mapping from SINR to the (capacity, dispersion)
//! pair that the coding layer consumes.
//!
//! Powers cross module boundaries in dB/dBm and are converted to linear
//! mW only inside [`sinr`]; distances are km, carrier frequencies GHz.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal};
use thiserror::Error;

/// Speed of light in km/s, used to convert link distances to propagation
/// delay in channel uses (1 cu = 10^-6 s).
pub const SPEED_OF_LIGHT_KM_PER_S: f64 = 299_792.458;

/// Channel uses per second at the reference symbol rate.
pub const CU_PER_SECOND: f64 = 1.0e6;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Errors from geometry construction and channel-state evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("invalid annulus radii: inner {inner} km, outer {outer} km (need 0 < inner < outer)")]
    InvalidRadii { inner: f64, outer: f64 },
    #[error("satellite altitude must be positive, got {0} km")]
    InvalidAltitude(f64),
    #[error("link distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("carrier frequency must be positive, got {0} GHz")]
    NonPositiveFrequency(f64),
    #[error("invalid pathloss model: {0}")]
    InvalidPathloss(String),
    #[error("invalid fading model: {0}")]
    InvalidFading(String),
    #[error("SINR must be non-negative, got {0}")]
    NegativeSinr(f64),
}

// --- unit conversions ---------------------------------------------------

/// Convert a power ratio in dB (or an absolute power in dBm) to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a linear power ratio (or mW value) to dB (or dBm).
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// One-way propagation delay over `distance_km`, rounded to the nearest
/// whole channel use.
pub fn propagation_delay_cu(distance_km: f64) -> u64 {
    (distance_km / SPEED_OF_LIGHT_KM_PER_S * CU_PER_SECOND).round() as u64
}

// --- topology -----------------------------------------------------------

/// Parameters for ground-station placement on the service annulus.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyParams {
    /// Satellite altitude above the destination plane, km.
    pub altitude_km: f64,
    /// Number of ground base stations to place.
    pub gbs_count: u32,
    /// Inner radius of the placement annulus, km.
    pub inner_radius_km: f64,
    /// Outer radius of the placement annulus, km.
    pub outer_radius_km: f64,
}

impl TopologyParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.altitude_km > 0.0) {
            return Err(ChannelError::InvalidAltitude(self.altitude_km));
        }
        if !(self.inner_radius_km > 0.0 && self.inner_radius_km < self.outer_radius_km) {
            return Err(ChannelError::InvalidRadii {
                inner: self.inner_radius_km,
                outer: self.outer_radius_km,
            });
        }
        Ok(())
    }
}

/// A placed network: the destination sits at the origin of the ground
/// plane, ground base stations on the annulus around it, and the satellite
/// directly overhead at `altitude_km`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub altitude_km: f64,
    pub inner_radius_km: f64,
    pub outer_radius_km: f64,
    /// Ground-station positions as (x, y) km on the destination plane.
    pub gbs_positions: Vec<(f64, f64)>,
}

impl Topology {
    /// The destination's position on the ground plane.
    pub fn destination(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    pub fn gbs_count(&self) -> usize {
        self.gbs_positions.len()
    }

    /// Ground distance from station `i` to the destination, km.
    pub fn gbs_to_destination_km(&self, i: usize) -> f64 {
        let (x, y) = self.gbs_positions[i];
        (x * x + y * y).sqrt()
    }

    /// Index of the station closest to the destination, ties broken toward
    /// the lower index. `None` when no stations were placed.
    pub fn nearest_gbs(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.gbs_positions.len() {
            let d = self.gbs_to_destination_km(i);
            match best {
                Some((_, bd)) if d >= bd => {}
                _ => best = Some((i, d)),
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Place `gbs_count` ground stations independently and uniformly *by area*
/// over the annulus `inner_radius_km <= r <= outer_radius_km`.
///
/// Uniform-by-area means the radial coordinate is drawn as
/// `sqrt(r_in^2 + u * (r_out^2 - r_in^2))`, not uniformly in `r`; the
/// angle is uniform on `[0, 2*pi)`. Zero stations yields an empty layout,
/// which is valid for the direct satellite-only path.
pub fn place_gbs<R: Rng + ?Sized>(
    params: &TopologyParams,
    rng: &mut R,
) -> Result<Topology, ChannelError> {
    params.validate()?;
    let r_in2 = params.inner_radius_km * params.inner_radius_km;
    let r_out2 = params.outer_radius_km * params.outer_radius_km;
    let mut positions = Vec::with_capacity(params.gbs_count as usize);
    for _ in 0..params.gbs_count {
        let u: f64 = rng.gen();
        let r = (r_in2 + u * (r_out2 - r_in2)).sqrt();
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        positions.push((r * theta.cos(), r * theta.sin()));
    }
    Ok(Topology {
        altitude_km: params.altitude_km,
        inner_radius_km: params.inner_radius_km,
        outer_radius_km: params.outer_radius_km,
        gbs_positions: positions,
    })
}

// --- pathloss -----------------------------------------------------------

/// Large-scale attenuation model for a link.
#[derive(Debug, Clone, PartialEq)]
pub enum PathlossModel {
    /// Free-space loss `92.45 + 20 log10(d_km) + 20 log10(f_GHz)` dB.
    FreeSpace,
    /// Log-distance loss `ref_loss_db + 10 * exponent * log10(d / ref_km)` dB.
    LogDistance {
        exponent: f64,
        ref_distance_km: f64,
        ref_loss_db: f64,
    },
}

impl PathlossModel {
    /// Validate parameters at configuration time. Terrestrial log-distance
    /// links are required to decay faster than free space (`exponent > 2`).
    pub fn validate(&self) -> Result<(), ChannelError> {
        match *self {
            PathlossModel::FreeSpace => Ok(()),
            PathlossModel::LogDistance {
                exponent,
                ref_distance_km,
                ref_loss_db,
            } => {
                if !(exponent > 2.0) {
                    return Err(ChannelError::InvalidPathloss(format!(
                        "log-distance exponent must exceed 2 (free space), got {exponent}"
                    )));
                }
                if !(ref_distance_km > 0.0) {
                    return Err(ChannelError::InvalidPathloss(format!(
                        "reference distance must be positive, got {ref_distance_km} km"
                    )));
                }
                if !ref_loss_db.is_finite() {
                    return Err(ChannelError::InvalidPathloss(format!(
                        "reference loss must be finite, got {ref_loss_db} dB"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Large-scale pathloss in dB over `distance_km` at `frequency_ghz`.
///
/// The frequency only enters the free-space model; log-distance carries its
/// frequency dependence inside the calibrated reference loss.
pub fn pathloss_db(
    distance_km: f64,
    frequency_ghz: f64,
    model: &PathlossModel,
) -> Result<f64, ChannelError> {
    if !(distance_km > 0.0) {
        return Err(ChannelError::NonPositiveDistance(distance_km));
    }
    if !(frequency_ghz > 0.0) {
        return Err(ChannelError::NonPositiveFrequency(frequency_ghz));
    }
    Ok(match *model {
        PathlossModel::FreeSpace => {
            92.45 + 20.0 * distance_km.log10() + 20.0 * frequency_ghz.log10()
        }
        PathlossModel::LogDistance {
            exponent,
            ref_distance_km,
            ref_loss_db,
        } => ref_loss_db + 10.0 * exponent * (distance_km / ref_distance_km).log10(),
    })
}

// --- fading -------------------------------------------------------------

/// Small-scale power-fading model. Every variant has unit mean power so
/// that the fading draw scales the link budget without shifting it.
#[derive(Debug, Clone, PartialEq)]
pub enum FadingModel {
    /// No fading: the power gain is identically 1.
    None,
    /// Rayleigh fading: exponentially distributed power gain, mean 1.
    Rayleigh,
    /// Rician fading with K-factor `k` (linear ratio of line-of-sight to
    /// scattered power). `k = 0` reduces to Rayleigh.
    Rician { k: f64 },
    /// Shadowed-Rician fading: the line-of-sight power itself is Gamma
    /// distributed with shape `m` and mean `omega`, on top of scattered
    /// components of per-axis variance `b`.
    ShadowedRician { b: f64, m: f64, omega: f64 },
}

impl FadingModel {
    pub fn validate(&self) -> Result<(), ChannelError> {
        match *self {
            FadingModel::None | FadingModel::Rayleigh => Ok(()),
            FadingModel::Rician { k } => {
                if !(k >= 0.0) {
                    return Err(ChannelError::InvalidFading(format!(
                        "Rician K-factor must be >= 0, got {k}"
                    )));
                }
                Ok(())
            }
            FadingModel::ShadowedRician { b, m, omega } => {
                if !(b > 0.0) {
                    return Err(ChannelError::InvalidFading(format!(
                        "shadowed-Rician scatter variance b must be > 0, got {b}"
                    )));
                }
                if !(m > 0.0) {
                    return Err(ChannelError::InvalidFading(format!(
                        "shadowed-Rician shape m must be > 0, got {m}"
                    )));
                }
                if !(omega >= 0.0) {
                    return Err(ChannelError::InvalidFading(format!(
                        "shadowed-Rician mean LOS power omega must be >= 0, got {omega}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Draw one power-fading gain from `model`.
///
/// The model must have passed [`FadingModel::validate`]; distribution
/// construction cannot fail for validated parameters.
pub fn draw_fading<R: Rng + ?Sized>(model: &FadingModel, rng: &mut R) -> f64 {
    match *model {
        FadingModel::None => 1.0,
        FadingModel::Rayleigh => Exp::new(1.0).unwrap().sample(rng),
        FadingModel::Rician { k } => {
            // Unit-mean decomposition: LOS amplitude s with s^2 = K/(K+1),
            // scattered per-axis variance 1 / (2 (K+1)).
            let s = (k / (k + 1.0)).sqrt();
            let sigma = (1.0 / (2.0 * (k + 1.0))).sqrt();
            let n = Normal::new(0.0, sigma).unwrap();
            let i = s + n.sample(rng);
            let q = n.sample(rng);
            i * i + q * q
        }
        FadingModel::ShadowedRician { b, m, omega } => {
            let los_power = if omega > 0.0 {
                Gamma::new(m, omega / m).unwrap().sample(rng)
            } else {
                0.0
            };
            let n = Normal::new(0.0, b.sqrt()).unwrap();
            let i = los_power.sqrt() + n.sample(rng);
            let q = n.sample(rng);
            i * i + q * q
        }
    }
}

// --- SINR and channel state ---------------------------------------------

/// Per-link radio parameters. Pathloss and fading models are carried here
/// so that a link is fully described by one value plus a distance.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub noise_power_dbm: f64,
    pub carrier_ghz: f64,
    pub pathloss: PathlossModel,
    pub fading: FadingModel,
}

impl LinkParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !self.tx_power_dbm.is_finite()
            || !self.antenna_gain_dbi.is_finite()
            || !self.noise_power_dbm.is_finite()
        {
            return Err(ChannelError::InvalidPathloss(
                "link powers and gains must be finite".into(),
            ));
        }
        if !(self.carrier_ghz > 0.0) {
            return Err(ChannelError::NonPositiveFrequency(self.carrier_ghz));
        }
        self.pathloss.validate()?;
        self.fading.validate()
    }
}

/// Instantaneous SINR (linear) for one transmission.
///
/// Signal power is `tx + gain - pathloss` in dB scaled by the fading draw
/// `serving_gain`; `interference_dbm` lists the received power of each
/// active co-channel interferer. All additions happen in linear mW.
pub fn sinr(
    link: &LinkParams,
    serving_gain: f64,
    pathloss_db: f64,
    interference_dbm: &[f64],
) -> f64 {
    let signal_mw =
        db_to_linear(link.tx_power_dbm + link.antenna_gain_dbi - pathloss_db) * serving_gain;
    let mut denom_mw = db_to_linear(link.noise_power_dbm);
    for &i_dbm in interference_dbm {
        denom_mw += db_to_linear(i_dbm);
    }
    signal_mw / denom_mw
}

/// Capacity (bits per channel use) and dispersion (bits^2 per channel use)
/// of an AWGN-style channel at a given SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub sinr: f64,
    /// Shannon capacity `log2(1 + sinr)`.
    pub capacity: f64,
    /// Channel dispersion `(1 - (1 + sinr)^-2) * (log2 e)^2`.
    pub dispersion: f64,
}

/// Evaluate capacity and dispersion at `sinr_linear`.
///
/// Zero SINR is a valid degenerate state (capacity and dispersion both 0);
/// negative SINR is a domain error.
pub fn channel_state(sinr_linear: f64) -> Result<ChannelState, ChannelError> {
    if !(sinr_linear >= 0.0) {
        return Err(ChannelError::NegativeSinr(sinr_linear));
    }
    let one_plus = 1.0 + sinr_linear;
    Ok(ChannelState {
        sinr: sinr_linear,
        capacity: one_plus.log2(),
        dispersion: (1.0 - 1.0 / (one_plus * one_plus)) * LOG2_E * LOG2_E,
    })
}

// ------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
        assert!(
            (actual - expected).abs() <= tol,
            "{what}: got {actual}, expected {expected} (tol {tol})"
        );
    }

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    // --- unit conversions ---

    #[test]
    fn db_linear_round_trip_is_exact_to_1e12() {
        for db in [-120.0, -30.0, -3.0, 0.0, 0.1, 10.0, 47.5, 90.0] {
            let back = linear_to_db(db_to_linear(db));
            assert_close(back, db, 1e-12, "dB -> linear -> dB round trip");
        }
        for lin in [1e-12, 1e-3, 0.5, 1.0, 3.9498, 1e6] {
            let back = db_to_linear(linear_to_db(lin));
            assert!(
                (back - lin).abs() / lin <= 1e-12,
                "linear -> dB -> linear round trip: {back} vs {lin}"
            );
        }
    }

    #[test]
    fn propagation_delay_matches_hand_values() {
        // 600 km at c = 299792.458 km/s is 2001.385... us, rounds to 2001 cu.
        assert_eq!(propagation_delay_cu(600.0), 2001);
        // 3 km ground link: 10.007 us -> 10 cu.
        assert_eq!(propagation_delay_cu(3.0), 10);
        assert_eq!(propagation_delay_cu(0.0), 0);
    }

    // --- placement ---

    #[test]
    fn place_gbs_zero_count_gives_empty_layout() {
        let params = TopologyParams {
            altitude_km: 600.0,
            gbs_count: 0,
            inner_radius_km: 2.0,
            outer_radius_km: 10.0,
        };
        let topo = place_gbs(&params, &mut rng(1)).expect("zero stations is a valid layout");
        assert!(topo.gbs_positions.is_empty());
        assert_eq!(topo.nearest_gbs(), None);
    }

    #[test]
    fn place_gbs_rejects_bad_radii() {
        let bad = TopologyParams {
            altitude_km: 600.0,
            gbs_count: 4,
            inner_radius_km: 10.0,
            outer_radius_km: 2.0,
        };
        assert!(matches!(
            place_gbs(&bad, &mut rng(1)),
            Err(ChannelError::InvalidRadii { .. })
        ));
        let zero_inner = TopologyParams {
            inner_radius_km: 0.0,
            ..bad
        };
        assert!(place_gbs(&zero_inner, &mut rng(1)).is_err());
    }

    #[test]
    fn place_gbs_respects_annulus_bounds() {
        let params = TopologyParams {
            altitude_km: 600.0,
            gbs_count: 500,
            inner_radius_km: 2.0,
            outer_radius_km: 10.0,
        };
        let topo = place_gbs(&params, &mut rng(7)).unwrap();
        for i in 0..topo.gbs_count() {
            let d = topo.gbs_to_destination_km(i);
            assert!(
                (2.0..=10.0).contains(&d),
                "station {i} at distance {d} km escaped the annulus"
            );
        }
    }

    #[test]
    fn place_gbs_is_deterministic_per_seed() {
        let params = TopologyParams {
            altitude_km: 600.0,
            gbs_count: 16,
            inner_radius_km: 2.0,
            outer_radius_km: 10.0,
        };
        let a = place_gbs(&params, &mut rng(42)).unwrap();
        let b = place_gbs(&params, &mut rng(42)).unwrap();
        assert_eq!(a, b, "same seed must reproduce the same layout");
    }

    #[test]
    fn place_gbs_radial_law_is_uniform_by_area() {
        // Kolmogorov-Smirnov distance between the empirical distribution of
        // squared distances and the uniform-by-area CDF
        // F(d) = (d^2 - r_in^2) / (r_out^2 - r_in^2).
        let params = TopologyParams {
            altitude_km: 600.0,
            gbs_count: 100_000,
            inner_radius_km: 2.0,
            outer_radius_km: 10.0,
        };
        let topo = place_gbs(&params, &mut rng(2024)).unwrap();
        let mut dist: Vec<f64> = (0..topo.gbs_count())
            .map(|i| topo.gbs_to_destination_km(i))
            .collect();
        dist.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = dist.len() as f64;
        let (r_in2, r_out2) = (4.0, 100.0);
        let mut ks: f64 = 0.0;
        for (i, d) in dist.iter().enumerate() {
            let f = (d * d - r_in2) / (r_out2 - r_in2);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            ks = ks.max((f - lo).abs()).max((f - hi).abs());
        }
        assert!(
            ks <= 0.01,
            "KS distance {ks} vs uniform-by-area CDF exceeds 0.01 at n = 1e5"
        );
    }

    // --- pathloss ---

    #[test]
    fn free_space_loss_matches_hand_computation() {
        // 92.45 + 20 log10(600) + 20 log10(2), evaluated independently.
        let loss = pathloss_db(600.0, 2.0, &PathlossModel::FreeSpace).unwrap();
        assert_close(loss, 154.0336249209525, 1e-10, "free-space loss 600 km / 2 GHz");
    }

    #[test]
    fn free_space_loss_doubles_by_six_db() {
        let f = PathlossModel::FreeSpace;
        let l1 = pathloss_db(5.0, 2.0, &f).unwrap();
        let l2 = pathloss_db(10.0, 2.0, &f).unwrap();
        assert_close(l2 - l1, 20.0 * 2f64.log10(), 1e-12, "distance doubling step");
    }

    #[test]
    fn log_distance_with_exponent_two_parallels_free_space() {
        // With exponent 2 the log-distance law has the same slope as free
        // space, so differences relative to the reference distance agree.
        // Exponent 2 fails configuration validation on purpose, so this
        // exercises pathloss_db directly.
        let ld = PathlossModel::LogDistance {
            exponent: 2.0,
            ref_distance_km: 1.0,
            ref_loss_db: 0.0,
        };
        let fs = PathlossModel::FreeSpace;
        for d in [0.5, 1.0, 3.0, 8.0] {
            let delta_ld =
                pathloss_db(d, 2.0, &ld).unwrap() - pathloss_db(1.0, 2.0, &ld).unwrap();
            let delta_fs =
                pathloss_db(d, 2.0, &fs).unwrap() - pathloss_db(1.0, 2.0, &fs).unwrap();
            assert_close(delta_ld, delta_fs, 1e-12, "slope match at exponent 2");
        }
        assert!(
            ld.validate().is_err(),
            "exponent 2 must be rejected at configuration time"
        );
    }

    #[test]
    fn pathloss_rejects_non_positive_distance() {
        for d in [0.0, -1.0] {
            assert!(matches!(
                pathloss_db(d, 2.0, &PathlossModel::FreeSpace),
                Err(ChannelError::NonPositiveDistance(_))
            ));
        }
    }

    // --- fading ---

    #[test]
    fn no_fading_is_identically_one() {
        let mut r = rng(3);
        for _ in 0..100 {
            assert_eq!(draw_fading(&FadingModel::None, &mut r), 1.0);
        }
    }

    #[test]
    fn fading_models_have_unit_mean_power() {
        let n = 1_000_000;
        for (model, label) in [
            (FadingModel::Rayleigh, "Rayleigh"),
            (FadingModel::Rician { k: 10.0 }, "Rician K=10"),
            (FadingModel::Rician { k: 0.0 }, "Rician K=0"),
        ] {
            let mut r = rng(11);
            let mean: f64 =
                (0..n).map(|_| draw_fading(&model, &mut r)).sum::<f64>() / n as f64;
            assert!(
                (mean - 1.0).abs() <= 0.01,
                "{label} mean power {mean} strays from 1 beyond 1%"
            );
        }
    }

    #[test]
    fn rician_k_zero_matches_rayleigh_distribution() {
        // Two-sample KS test at n = 1e5 per side; both laws are Exp(1).
        let n = 100_000;
        let mut r1 = rng(5);
        let mut r2 = rng(6);
        let mut a: Vec<f64> = (0..n)
            .map(|_| draw_fading(&FadingModel::Rician { k: 0.0 }, &mut r1))
            .collect();
        let mut b: Vec<f64> = (0..n)
            .map(|_| draw_fading(&FadingModel::Rayleigh, &mut r2))
            .collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (mut i, mut j, mut ks) = (0usize, 0usize, 0f64);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            ks = ks.max((i as f64 / n as f64 - j as f64 / n as f64).abs());
        }
        // 1e-3 significance threshold for the two-sample statistic:
        // c(alpha) * sqrt(2/n) with c(1e-3) = 1.95.
        let crit = 1.95 * (2.0 / n as f64).sqrt();
        assert!(
            ks <= crit,
            "two-sample KS {ks} between Rician K=0 and Rayleigh exceeds {crit}"
        );
    }

    #[test]
    fn shadowed_rician_mean_matches_closed_form() {
        // E[gain] = omega + 2b: mean LOS power plus scattered power.
        let model = FadingModel::ShadowedRician {
            b: 0.126,
            m: 10.1,
            omega: 0.835,
        };
        let n = 1_000_000;
        let mut r = rng(13);
        let mean: f64 = (0..n).map(|_| draw_fading(&model, &mut r)).sum::<f64>() / n as f64;
        let expected = 0.835 + 2.0 * 0.126;
        assert!(
            (mean - expected).abs() / expected <= 0.01,
            "shadowed-Rician mean {mean} vs {expected}"
        );
    }

    #[test]
    fn fading_validation_rejects_bad_parameters() {
        assert!(FadingModel::Rician { k: -0.5 }.validate().is_err());
        assert!(FadingModel::ShadowedRician { b: 0.0, m: 1.0, omega: 1.0 }
            .validate()
            .is_err());
        assert!(FadingModel::ShadowedRician { b: 0.1, m: 0.0, omega: 1.0 }
            .validate()
            .is_err());
        assert!(FadingModel::Rician { k: 10.0 }.validate().is_ok());
    }

    // --- SINR ---

    fn test_link(noise_dbm: f64) -> LinkParams {
        LinkParams {
            tx_power_dbm: 30.0,
            antenna_gain_dbi: 20.0,
            noise_power_dbm: noise_dbm,
            carrier_ghz: 2.0,
            pathloss: PathlossModel::FreeSpace,
            fading: FadingModel::None,
        }
    }

    #[test]
    fn sinr_is_one_when_signal_equals_noise() {
        // tx + gain - loss = noise exactly.
        let link = test_link(-104.0);
        let s = sinr(&link, 1.0, 154.0, &[]);
        assert_close(s, 1.0, 1e-12, "signal == noise gives SINR 1");
    }

    #[test]
    fn single_interferer_at_noise_power_halves_sinr() {
        let link = test_link(-104.0);
        let without = sinr(&link, 1.0, 154.0, &[]);
        let with = sinr(&link, 1.0, 154.0, &[-104.0]);
        assert_close(with / without, 0.5, 1e-12, "interferer at noise power");
    }

    #[test]
    fn sinr_matches_link_budget_chain() {
        // 30 dBm + 20 dBi - 154.0336 dB + 110 dB noise floor = 5.9664 dB.
        let link = test_link(-110.0);
        let loss = pathloss_db(600.0, 2.0, &PathlossModel::FreeSpace).unwrap();
        let s = sinr(&link, 1.0, loss, &[]);
        assert_close(s, 3.9503675753044545, 1e-10, "600 km link budget");
    }

    #[test]
    fn sinr_scales_linearly_with_fading_gain() {
        let link = test_link(-110.0);
        let base = sinr(&link, 1.0, 154.0, &[]);
        for g in [0.0, 0.25, 1.7] {
            assert_close(
                sinr(&link, g, 154.0, &[]),
                base * g,
                1e-12 * base.max(1.0),
                "fading linearity",
            );
        }
    }

    #[test]
    fn sinr_monotonicity_in_power_and_interference() {
        let mut r = rng(17);
        for _ in 0..200 {
            let mut link = test_link(-100.0 - 20.0 * r.gen::<f64>());
            let loss = 120.0 + 40.0 * r.gen::<f64>();
            let base = sinr(&link, 1.0, loss, &[]);
            link.tx_power_dbm += 3.0;
            let more_power = sinr(&link, 1.0, loss, &[]);
            assert!(more_power > base, "raising tx power must raise SINR");
            let with_interf = sinr(&link, 1.0, loss, &[-105.0]);
            assert!(
                with_interf < more_power,
                "adding an interferer must lower SINR"
            );
        }
    }

    // --- channel state ---

    #[test]
    fn channel_state_degenerate_at_zero_sinr() {
        let s = channel_state(0.0).unwrap();
        assert_eq!(s.capacity, 0.0, "capacity at zero SINR");
        assert_eq!(s.dispersion, 0.0, "dispersion at zero SINR");
    }

    #[test]
    fn channel_state_at_unit_sinr() {
        let s = channel_state(1.0).unwrap();
        assert_close(s.capacity, 1.0, 1e-15, "capacity log2(2)");
        assert_close(
            s.dispersion,
            1.5610267357542058,
            1e-12,
            "dispersion 0.75 * (log2 e)^2",
        );
    }

    #[test]
    fn channel_state_rejects_negative_sinr() {
        assert!(matches!(
            channel_state(-1e-9),
            Err(ChannelError::NegativeSinr(_))
        ));
    }

    #[test]
    fn capacity_and_dispersion_increase_with_sinr() {
        let mut prev = channel_state(0.0).unwrap();
        let limit = LOG2_E * LOG2_E;
        for i in 1..=60 {
            let s = channel_state(i as f64 * 0.5).unwrap();
            assert!(
                s.capacity > prev.capacity,
                "capacity must increase with SINR"
            );
            assert!(
                s.dispersion > prev.dispersion,
                "dispersion must increase with SINR"
            );
            assert!(
                s.dispersion < limit,
                "dispersion {} must stay below (log2 e)^2 = {limit}",
                s.dispersion
            );
            prev = s;
        }
    }
}
