//! System-identification simulator.
//!
//! An unknown FIR plant `y(n) = Σ a_k x(n-k) + v(n)` is driven by an i.i.d.
//! BPSK sequence, with `v ~ N(0, σ²)` calibrated from an output-referred SNR.
//! An adaptive filter with the same number of taps learns the plant from
//! `(x, y)` pairs.
//!
//! Randomness is split into independent ChaCha streams keyed by
//! `(seed, run index, role)`, so runs can be generated in any order or in
//! parallel and still reproduce bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::filter::{Algorithm, FilterConfig, FilterKernel, Regressor};
use crate::metrics::nwd_db;
use crate::scalar::Scalar;

/// The true system: FIR coefficients and disturbance variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec<T> {
    pub coeffs: Vec<T>,
    pub disturbance_variance: T,
}

impl<T: Scalar> PlantSpec<T> {
    pub fn new(coeffs: Vec<T>, disturbance_variance: T) -> Result<Self> {
        let spec = Self {
            coeffs,
            disturbance_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `a = (0.9, 0.3, -0.1)` with no disturbance.
    pub fn paper_plant() -> Self {
        Self {
            coeffs: vec![T::lit(0.9), T::lit(0.3), T::lit(-0.1)],
            disturbance_variance: T::zero(),
        }
    }

    /// Same coefficients, disturbance calibrated to `snr_db` relative to the
    /// clean output power.
    pub fn at_snr(&self, snr_db: T) -> Result<Self> {
        let power = clean_plant_power(&self.coeffs);
        Ok(Self {
            coeffs: self.coeffs.clone(),
            disturbance_variance: snr_to_variance(snr_db, power)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.coeffs.is_empty() {
            v.push("plant coefficients must be non-empty".to_string());
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            v.push("plant coefficients must be finite".to_string());
        }
        if !(self.disturbance_variance >= T::zero() && self.disturbance_variance.is_finite()) {
            v.push(format!(
                "disturbance variance {} must be finite and non-negative",
                self.disturbance_variance
            ));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

/// Role tag of an RNG stream within one Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamRole {
    Input = 0,
    Disturbance = 1,
}

impl StreamRole {
    const COUNT: u64 = 2;

    /// Independent generator for `(seed, run, role)`.
    pub fn stream(self, seed: u64, run: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run.wrapping_mul(Self::COUNT).wrapping_add(self as u64));
        rng
    }
}

/// The per-run RNG streams.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub input: ChaCha8Rng,
    pub disturbance: ChaCha8Rng,
}

impl RunStreams {
    pub fn new(seed: u64, run: u64) -> Self {
        Self {
            input: StreamRole::Input.stream(seed, run),
            disturbance: StreamRole::Disturbance.stream(seed, run),
        }
    }
}

/// I.i.d. equiprobable ±1 symbols.
pub fn bpsk_sequence<T: Scalar, R: Rng + ?Sized>(n_samples: usize, rng: &mut R) -> Vec<T> {
    (0..n_samples)
        .map(|_| {
            if rng.random::<bool>() {
                T::one()
            } else {
                -T::one()
            }
        })
        .collect()
}

/// Output power `Σ a_k²` of the FIR under unit-power white input.
pub fn clean_plant_power<T: Scalar>(coeffs: &[T]) -> T {
    coeffs.iter().fold(T::zero(), |acc, &a| acc + a * a)
}

/// Disturbance variance giving `snr_db` for the given signal power.
pub fn snr_to_variance<T: Scalar>(snr_db: T, signal_power: T) -> Result<T> {
    if !(signal_power > T::zero() && signal_power.is_finite()) {
        return Err(Error::Domain {
            name: "signal power",
            value: signal_power.as_f64(),
            domain: "(0, inf)",
        });
    }
    Ok(signal_power / T::lit(10.0).powf(snr_db / T::lit(10.0)))
}

/// `Σ a_k x(n-k)` plus one draw of `N(0, σ²)`.
///
/// A draw is consumed even when `σ² = 0`, so the disturbance stream stays
/// aligned across noise levels.
pub fn plant_output<T: Scalar, R: Rng + ?Sized>(
    window: &Regressor<T>,
    spec: &PlantSpec<T>,
    rng: &mut R,
) -> Result<T> {
    if window.len() != spec.coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.coeffs.len(),
            got: window.len(),
        });
    }
    let clean = spec
        .coeffs
        .iter()
        .zip(window.taps())
        .fold(T::zero(), |acc, (&a, &x)| acc + a * x);
    let z: f64 = rng.sample(StandardNormal);
    Ok(clean + spec.disturbance_variance.sqrt() * T::lit(z))
}

/// A fixed set of `(input, desired)` samples for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet<T> {
    pub inputs: Vec<T>,
    pub desired: Vec<T>,
}

impl<T: Scalar> TrainingSet<T> {
    /// Draws `n_samples` BPSK inputs and pushes them through the plant with
    /// zero prehistory.
    pub fn generate(
        plant: &PlantSpec<T>,
        n_samples: usize,
        streams: &mut RunStreams,
    ) -> Result<Self> {
        plant.validate()?;
        let inputs: Vec<T> = bpsk_sequence(n_samples, &mut streams.input);
        let mut window = Regressor::zeros(plant.coeffs.len());
        let mut desired = Vec::with_capacity(n_samples);
        for &x in &inputs {
            window.push(x);
            desired.push(plant_output(&window, plant, &mut streams.disturbance)?);
        }
        Ok(Self { inputs, desired })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// What one entry of a [`RunSeries`] stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recording {
    /// One entry per sample: `e²(n)` and the NWD after the update.
    PerSample,
    /// One entry per pass over the training set: mean `e²` over the pass
    /// and the NWD at the end of the pass.
    PerPass,
}

/// Per-iteration traces of one Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries<T> {
    pub squared_error: Vec<T>,
    pub nwd_db: Vec<T>,
    pub final_weights: Vec<T>,
}

impl<T> RunSeries<T> {
    pub fn len(&self) -> usize {
        self.squared_error.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squared_error.is_empty()
    }
}

/// Trains a fresh filter on `set` for `passes` passes.
///
/// Every pass replays the set from zero prehistory; weights, step size and
/// error correlation carry over between passes.
pub fn train<T: Scalar>(
    algorithm: Algorithm,
    cfg: &FilterConfig<T>,
    plant: &PlantSpec<T>,
    set: &TrainingSet<T>,
    passes: usize,
    recording: Recording,
) -> Result<RunSeries<T>> {
    let kernel = FilterKernel::new(cfg)?;
    if plant.coeffs.len() != cfg.tap_count {
        return Err(Error::DimensionMismatch {
            expected: cfg.tap_count,
            got: plant.coeffs.len(),
        });
    }
    let n = set.len();
    if n < cfg.tap_count || passes == 0 {
        return Err(Error::InvalidConfig(vec![format!(
            "need at least tap_count = {} samples and one pass (got {n} samples, {passes} passes)",
            cfg.tap_count
        )]));
    }
    let capacity = match recording {
        Recording::PerSample => n * passes,
        Recording::PerPass => passes,
    };
    let mut series = RunSeries {
        squared_error: Vec::with_capacity(capacity),
        nwd_db: Vec::with_capacity(capacity),
        final_weights: Vec::new(),
    };
    let mut state = kernel.initial_state();
    let mut window = Regressor::zeros(cfg.tap_count);
    let inv_n = T::one() / T::lit(n as f64);
    for _ in 0..passes {
        window.reset();
        let mut pass_sum = T::zero();
        for (&x, &d) in set.inputs.iter().zip(&set.desired) {
            window.push(x);
            let e = kernel.step(algorithm, &mut state, &window, d)?;
            match recording {
                Recording::PerSample => {
                    series.squared_error.push(e * e);
                    series.nwd_db.push(nwd_db(&state.weights, &plant.coeffs)?);
                }
                Recording::PerPass => pass_sum = pass_sum + e * e,
            }
        }
        if recording == Recording::PerPass {
            series.squared_error.push(pass_sum * inv_n);
            series.nwd_db.push(nwd_db(&state.weights, &plant.coeffs)?);
        }
    }
    series.final_weights = state.weights;
    Ok(series)
}

/// Single pass over freshly generated data, recorded per sample.
pub fn run_identification<T: Scalar>(
    algorithm: Algorithm,
    cfg: &FilterConfig<T>,
    plant: &PlantSpec<T>,
    n_samples: usize,
    streams: &mut RunStreams,
) -> Result<RunSeries<T>> {
    let set = TrainingSet::generate(plant, n_samples, streams)?;
    train(algorithm, cfg, plant, &set, 1, Recording::PerSample)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_alphabet_and_determinism() {
        let a: Vec<f64> = bpsk_sequence(1000, &mut StreamRole::Input.stream(42, 0));
        let b: Vec<f64> = bpsk_sequence(1000, &mut StreamRole::Input.stream(42, 0));
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x * x == 1.0));
        let c: Vec<f64> = bpsk_sequence(1000, &mut StreamRole::Input.stream(42, 1));
        assert_ne!(a, c);
    }

    #[test]
    fn bpsk_is_balanced() {
        let x: Vec<f64> = bpsk_sequence(100_000, &mut StreamRole::Input.stream(7, 3));
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn clean_power_examples() {
        assert_eq!(clean_plant_power(&[1.0]), 1.0);
        assert!((clean_plant_power(&[0.9_f64, 0.3, -0.1]) - 0.91).abs() < 1e-15);
        assert_eq!(clean_plant_power(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn snr_examples() {
        assert!((snr_to_variance(0.0_f64, 0.91).unwrap() - 0.91).abs() < 1e-15);
        assert!((snr_to_variance(10.0_f64, 0.91).unwrap() - 0.091).abs() < 1e-15);
        assert!((snr_to_variance(20.0_f64, 1.0).unwrap() - 0.01).abs() < 1e-15);
        assert!(matches!(
            snr_to_variance(10.0, 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            snr_to_variance(10.0, -1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn noiseless_plant_output() {
        let plant = PlantSpec::<f64>::paper_plant();
        let mut rng = StreamRole::Disturbance.stream(1, 0);
        let y = plant_output(&Regressor::from_taps(vec![1.0, 1.0, 1.0]), &plant, &mut rng).unwrap();
        assert!((y - 1.1).abs() < 1e-15);
        let selector = PlantSpec::new(vec![1.0, 0.0, 0.0], 0.0).unwrap();
        let y = plant_output(
            &Regressor::from_taps(vec![-1.0, 1.0, 1.0]),
            &selector,
            &mut rng,
        )
        .unwrap();
        assert_eq!(y, -1.0);
    }

    #[test]
    fn disturbance_variance_matches() {
        let plant = PlantSpec::new(vec![0.9, 0.3, -0.1], 0.01).unwrap();
        let window = Regressor::from_taps(vec![1.0, -1.0, 1.0]);
        let clean = 0.9 - 0.3 - 0.1;
        let mut rng = StreamRole::Disturbance.stream(99, 0);
        let n = 100_000;
        let noise: Vec<f64> = (0..n)
            .map(|_| plant_output(&window, &plant, &mut rng).unwrap() - clean)
            .collect();
        let mean = noise.iter().sum::<f64>() / n as f64;
        let var = noise.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(var > 0.0093 && var < 0.0107, "variance {var}");
    }

    #[test]
    fn mismatched_plant_is_rejected() {
        let cfg = FilterConfig::<f64> {
            tap_count: 2,
            ..FilterConfig::paper_defaults()
        };
        let plant = PlantSpec::<f64>::paper_plant();
        let mut streams = RunStreams::new(0, 0);
        let r = run_identification(Algorithm::Lms, &cfg, &plant, 10, &mut streams);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn per_pass_recording_length() {
        let cfg = FilterConfig::<f64>::paper_defaults();
        let plant = PlantSpec::<f64>::paper_plant().at_snr(20.0).unwrap();
        let set = TrainingSet::generate(&plant, 50, &mut RunStreams::new(3, 0)).unwrap();
        let s = train(
            Algorithm::RvssFlms,
            &cfg,
            &plant,
            &set,
            7,
            Recording::PerPass,
        )
        .unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s.nwd_db.len(), 7);
        let s = train(
            Algorithm::RvssFlms,
            &cfg,
            &plant,
            &set,
            2,
            Recording::PerSample,
        )
        .unwrap();
        assert_eq!(s.len(), 100);
    }
}
