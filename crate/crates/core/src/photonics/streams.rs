//! Photon-stream Monte Carlo and second-order correlation statistics.
//!
//! Each emitter is a renewal process: successive photons are separated by
//! the radiative lifetime (dead time) plus an exponential re-excitation
//! delay, which produces the antibunching dip. Background fluorescence is
//! an independent Poisson process co-propagating in the same channel.
//! Photons split at beamsplitters as Bernoulli trials on the network power
//! fractions (intensity semantics; two-photon interference is out of
//! scope).
//!
//! Every stochastic choice draws from a counter-based substream keyed by
//! (seed, source index, purpose), so streams are reproducible and may be
//! generated in any order.

use serde::{Deserialize, Serialize};

use super::PhotonicsError;
use crate::rng::Stream;

/// Default detector dead time.
pub const DEFAULT_DETECTOR_DEAD_TIME_NS: f64 = 50.0;

/// A fluorescent emitter feeding one network input channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterSource {
    /// Network input this emitter's light enters.
    pub channel: String,
    /// Radiative lifetime in ns; also the emission dead time.
    pub lifetime_ns: f64,
    /// Mean re-excitation rate in counts/s.
    pub signal_rate_hz: f64,
    /// Poisson background rate in counts/s (other emitters in the guide).
    pub background_rate_hz: f64,
}

impl EmitterSource {
    /// Signal fraction ρ = S/(S+B); g²(0) = 1 − ρ² analytically.
    pub fn signal_fraction(&self) -> f64 {
        if self.signal_rate_hz + self.background_rate_hz == 0.0 {
            0.0
        } else {
            self.signal_rate_hz / (self.signal_rate_hz + self.background_rate_hz)
        }
    }
}

/// Time-tag record of one detector.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonRecord {
    pub detector: String,
    /// Strictly ascending after dead-time enforcement, in ns.
    pub timestamps_ns: Vec<f64>,
}

impl PhotonRecord {
    /// CSV rows `detector,timestamp_ns`.
    pub fn to_csv(records: &[PhotonRecord]) -> String {
        let mut out = String::from("detector,timestamp_ns\n");
        for r in records {
            for t in &r.timestamps_ns {
                out.push_str(&format!("{},{t}\n", r.detector));
            }
        }
        out
    }
}

/// Power routing of source channels to detectors: (detector, fraction)
/// pairs per channel.
pub trait Routing {
    fn fractions(&self, channel: &str) -> Result<Vec<(String, f64)>, PhotonicsError>;
}

impl Routing for super::SwitchNetwork {
    fn fractions(&self, channel: &str) -> Result<Vec<(String, f64)>, PhotonicsError> {
        self.power_fractions(channel)
    }
}

/// Fixed routing table (for tests and direct splits).
pub struct FixedRouting(pub Vec<(String, Vec<(String, f64)>)>);

impl Routing for FixedRouting {
    fn fractions(&self, channel: &str) -> Result<Vec<(String, f64)>, PhotonicsError> {
        self.0
            .iter()
            .find(|(c, _)| c == channel)
            .map(|(_, f)| f.clone())
            .ok_or_else(|| PhotonicsError::Topology(format!("unknown channel '{channel}'")))
    }
}

/// Simulate time-tagged detection for all sources routed through the
/// network. Deterministic per seed; substreams per source are independent,
/// so per-source generation order does not matter.
pub fn simulate_photon_streams(
    sources: &[EmitterSource],
    routing: &dyn Routing,
    duration_s: f64,
    seed: u64,
    detector_dead_time_ns: f64,
) -> Result<Vec<PhotonRecord>, PhotonicsError> {
    assert!(duration_s > 0.0, "duration must be positive");
    let mut detector_names: Vec<String> = Vec::new();
    // (time ns, source idx, seq) per detector for a deterministic merge
    let mut events: Vec<Vec<(f64, usize, u64)>> = Vec::new();

    for (si, src) in sources.iter().enumerate() {
        let fractions = routing.fractions(&src.channel)?;
        for (det, _) in &fractions {
            if !detector_names.contains(det) {
                detector_names.push(det.clone());
                events.push(Vec::new());
            }
        }
        let det_index = |name: &str, detector_names: &[String]| {
            detector_names.iter().position(|d| d == name).unwrap()
        };

        let mut route_stream = Stream::new(seed, (si as u64) * 4 + 2);
        let mut seq = 0u64;
        let mut route = |t_ns: f64,
                         events: &mut Vec<Vec<(f64, usize, u64)>>,
                         route_stream: &mut Stream| {
            let u = route_stream.next_f64();
            let mut acc = 0.0;
            for (det, frac) in &fractions {
                acc += frac;
                if u < acc {
                    events[det_index(det, &detector_names)].push((t_ns, si, seq));
                    break;
                }
            }
            // u beyond the cumulative sum: photon lost in an undesignated port
            seq += 1;
        };

        // signal: renewal process with dead time = lifetime
        if src.signal_rate_hz > 0.0 {
            let mut s = Stream::new(seed, (si as u64) * 4);
            let mut t = s.exponential(src.signal_rate_hz);
            while t < duration_s {
                route(t * 1e9, &mut events, &mut route_stream);
                t += src.lifetime_ns * 1e-9 + s.exponential(src.signal_rate_hz);
            }
        }
        // background: plain Poisson process
        if src.background_rate_hz > 0.0 {
            let mut s = Stream::new(seed, (si as u64) * 4 + 1);
            let mut t = s.exponential(src.background_rate_hz);
            while t < duration_s {
                route(t * 1e9, &mut events, &mut route_stream);
                t += s.exponential(src.background_rate_hz);
            }
        }
    }

    let mut records = Vec::new();
    for (di, name) in detector_names.iter().enumerate() {
        let evs = &mut events[di];
        evs.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut timestamps = Vec::with_capacity(evs.len());
        let mut last_accepted = f64::NEG_INFINITY;
        for &(t, _, _) in evs.iter() {
            if t - last_accepted >= detector_dead_time_ns {
                timestamps.push(t);
                last_accepted = t;
            }
        }
        records.push(PhotonRecord {
            detector: name.clone(),
            timestamps_ns: timestamps,
        });
    }
    Ok(records)
}

/// Normalized coincidence histogram between two detectors.
#[derive(Debug, Clone)]
pub struct G2Histogram {
    /// Bin centers (ns), τ = t_b − t_a.
    pub tau_ns: Vec<f64>,
    pub counts: Vec<u64>,
    /// counts normalized by the uncorrelated expectation n_a·n_b·Δτ/T.
    pub normalized: Vec<f64>,
    pub bin_width_ns: f64,
}

impl G2Histogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau_ns,counts,normalized\n");
        for ((t, c), n) in self.tau_ns.iter().zip(&self.counts).zip(&self.normalized) {
            out.push_str(&format!("{t},{c},{n}\n"));
        }
        out
    }
}

/// Histogram coincidences with |τ| ≤ tau_range over bins of `bin_width`.
/// `duration_ns` is the acquisition window used for normalization.
pub fn g2_histogram(
    a: &PhotonRecord,
    b: &PhotonRecord,
    bin_width_ns: f64,
    tau_range_ns: f64,
    duration_ns: f64,
) -> G2Histogram {
    assert!(bin_width_ns > 0.0 && tau_range_ns > bin_width_ns);
    let half_bins = (tau_range_ns / bin_width_ns).floor() as i64;
    let n_bins = (2 * half_bins + 1) as usize;
    let mut counts = vec![0u64; n_bins];

    let tb = &b.timestamps_ns;
    let mut lo = 0usize;
    for &ta in &a.timestamps_ns {
        while lo < tb.len() && tb[lo] < ta - tau_range_ns {
            lo += 1;
        }
        let mut j = lo;
        while j < tb.len() && tb[j] <= ta + tau_range_ns {
            let tau = tb[j] - ta;
            let bin = (tau / bin_width_ns).round() as i64 + half_bins;
            if bin >= 0 && (bin as usize) < n_bins {
                counts[bin as usize] += 1;
            }
            j += 1;
        }
    }

    let expectation = a.timestamps_ns.len() as f64 * b.timestamps_ns.len() as f64 * bin_width_ns
        / duration_ns;
    let normalized = counts
        .iter()
        .map(|&c| c as f64 / expectation.max(f64::MIN_POSITIVE))
        .collect();
    let tau_ns = (-half_bins..=half_bins)
        .map(|i| i as f64 * bin_width_ns)
        .collect();
    G2Histogram {
        tau_ns,
        counts,
        normalized,
        bin_width_ns,
    }
}

/// g²(0) estimate from the central bin against the far-τ plateau.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct G2Zero {
    pub value: f64,
    pub stderr: f64,
}

pub fn g2_zero(hist: &G2Histogram) -> Result<G2Zero, PhotonicsError> {
    let n = hist.tau_ns.len();
    let center = n / 2;
    let range = hist.tau_ns[n - 1];
    // plateau: outer 40% of the τ range on both sides
    let plateau: Vec<usize> = (0..n)
        .filter(|&i| hist.tau_ns[i].abs() >= 0.6 * range)
        .collect();
    let plateau_counts: u64 = plateau.iter().map(|&i| hist.counts[i]).sum();
    if plateau_counts < 100 {
        return Err(PhotonicsError::Statistics {
            found: plateau_counts,
            need: 100,
        });
    }
    let plateau_mean =
        plateau.iter().map(|&i| hist.normalized[i]).sum::<f64>() / plateau.len() as f64;
    let central = hist.normalized[center];
    let value = central / plateau_mean;
    let central_counts = hist.counts[center].max(1) as f64;
    let stderr = (central / plateau_mean)
        .max(1.0 / central_counts)
        * (1.0 / central_counts + 1.0 / plateau_counts as f64).sqrt();
    Ok(G2Zero { value, stderr })
}

/// Analytic expectation for an ideal single emitter with background:
/// g²(0) = 1 − ρ².
pub fn g2_zero_analytic(signal_fraction: f64) -> f64 {
    1.0 - signal_fraction * signal_fraction
}
