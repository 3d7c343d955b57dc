//! Vibration records, fixed-length segmentation, normalization and a synthetic
//! bearing-signal generator for running the pipeline without the CWRU corpus.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Default window length in samples (0.0833 s at 12 kHz).
pub const DEFAULT_SEGMENT_LEN: usize = 1000;

/// Sampling rate of the CWRU drive-end channel.
pub const CWRU_SAMPLE_RATE_HZ: f64 = 12_000.0;

/// Motor speeds present in every CWRU condition.
pub const CWRU_RPMS: [u32; 4] = [1730, 1750, 1772, 1797];

/// Seeded fault diameters, in inches.
pub const FAULT_DIAMETERS_IN: [f64; 3] = [0.007, 0.014, 0.021];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SignalError {
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("segment length must be at least 2, got {0}")]
    SegmentLength(usize),
    #[error("empty input")]
    Empty,
    #[error("invalid bounds: lo ({lo}) must be < hi ({hi})")]
    Bounds { lo: f64, hi: f64 },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("invalid synth config: {0}")]
    InvalidSynth(String),
}

/// Bearing health condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Healthy,
    Ball,
    InnerRace,
    OuterRace,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Healthy,
        Condition::Ball,
        Condition::InnerRace,
        Condition::OuterRace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Healthy => "healthy",
            Condition::Ball => "ball",
            Condition::InnerRace => "inner_race",
            Condition::OuterRace => "outer_race",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "healthy" | "normal" => Ok(Condition::Healthy),
            "ball" | "b" => Ok(Condition::Ball),
            "inner_race" | "innerrace" | "inner" | "ir" => Ok(Condition::InnerRace),
            "outer_race" | "outerrace" | "outer" | "or" => Ok(Condition::OuterRace),
            other => Err(format!("unknown condition '{other}'")),
        }
    }
}

/// Provenance carried by a record and every segment cut from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordMeta {
    pub rpm: u32,
    pub condition: Condition,
    /// Inches; `None` iff the bearing is healthy.
    pub fault_diameter_in: Option<f64>,
}

impl RecordMeta {
    pub fn new(rpm: u32, condition: Condition, fault_diameter_in: Option<f64>) -> Result<Self, SignalError> {
        let meta = RecordMeta {
            rpm,
            condition,
            fault_diameter_in,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if self.rpm == 0 {
            return Err(SignalError::InvalidRecord("rpm must be positive".into()));
        }
        match (self.condition, self.fault_diameter_in) {
            (Condition::Healthy, None) => Ok(()),
            (Condition::Healthy, Some(_)) => Err(SignalError::InvalidRecord(
                "healthy record must not carry a fault diameter".into(),
            )),
            (_, None) => Err(SignalError::InvalidRecord(
                "faulty record requires a fault diameter".into(),
            )),
            (_, Some(d)) if !(d >= 0.0 && d.is_finite()) => Err(SignalError::InvalidRecord(format!(
                "fault diameter must be a finite value >= 0, got {d}"
            ))),
            _ => Ok(()),
        }
    }
}

/// A complete acceleration recording (unit: g).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub meta: RecordMeta,
}

impl SignalRecord {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64, meta: RecordMeta) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::Empty);
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(SignalError::InvalidRecord(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        meta.validate()?;
        Ok(SignalRecord {
            samples,
            sample_rate_hz,
            meta,
        })
    }
}

/// A fixed-length window of one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub samples: Vec<f64>,
    pub source: Arc<RecordMeta>,
    /// Ordinal of this window within its record.
    pub index: usize,
}

impl Segment {
    /// Segment with placeholder provenance, mostly for encoding ad-hoc data.
    pub fn from_samples(samples: Vec<f64>) -> Self {
        Segment {
            samples,
            source: Arc::new(RecordMeta {
                rpm: 1,
                condition: Condition::Healthy,
                fault_diameter_in: None,
            }),
            index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Cuts `record` into `floor(N / length)` consecutive, non-overlapping windows.
/// The trailing remainder is dropped.
pub fn segment_record(record: &SignalRecord, length: usize) -> Result<Vec<Segment>, SignalError> {
    if length < 2 {
        return Err(SignalError::SegmentLength(length));
    }
    if record.samples.len() < length {
        return Err(SignalError::InsufficientSamples {
            needed: length,
            got: record.samples.len(),
        });
    }
    let source = Arc::new(record.meta);
    Ok(record
        .samples
        .chunks_exact(length)
        .enumerate()
        .map(|(index, window)| Segment {
            samples: window.to_vec(),
            source: Arc::clone(&source),
            index,
        })
        .collect())
}

/// Affine map of `[min, max]` onto `[lo, hi]`. A constant input maps to `lo`.
pub fn minmax_normalize(samples: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>, SignalError> {
    if samples.is_empty() {
        return Err(SignalError::Empty);
    }
    if !(lo < hi) {
        return Err(SignalError::Bounds { lo, hi });
    }
    let (min, max) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), &v| {
        (mn.min(v), mx.max(v))
    });
    let span = max - min;
    if span == 0.0 {
        return Ok(vec![lo; samples.len()]);
    }
    let width = hi - lo;
    Ok(samples
        .iter()
        .map(|&v| (lo + (v - min) / span * width).clamp(lo, hi))
        .collect())
}

/// Parameters of the synthetic rig.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub sample_rate_hz: f64,
    pub rpm: f64,
    /// Impulse repetition rates for ball, inner-race and outer-race faults.
    pub ball_rate_hz: f64,
    pub inner_rate_hz: f64,
    pub outer_rate_hz: f64,
    /// Structural resonance excited by each impact.
    pub ring_freq_hz: f64,
    /// Exponential decay constant of the ringing, 1/s.
    pub ring_decay: f64,
    /// Impulse amplitude at the smallest (0.007") fault; grows linearly with diameter.
    pub impulse_amp: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Rates derived from the drive-end 6205 bearing's characteristic
    /// frequencies (BSF, BPFI, BPFO as multiples of shaft speed).
    pub fn for_rpm(rpm: f64, seed: u64) -> Self {
        let shaft = rpm / 60.0;
        SynthConfig {
            sample_rate_hz: CWRU_SAMPLE_RATE_HZ,
            rpm,
            ball_rate_hz: 2.0 * 4.7135 * shaft,
            inner_rate_hz: 5.4152 * shaft,
            outer_rate_hz: 3.5848 * shaft,
            ring_freq_hz: 2_900.0,
            ring_decay: 900.0,
            impulse_amp: 3.0,
            noise_sigma: 0.15,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        let positive = [
            ("sample_rate_hz", self.sample_rate_hz),
            ("rpm", self.rpm),
            ("ball_rate_hz", self.ball_rate_hz),
            ("inner_rate_hz", self.inner_rate_hz),
            ("outer_rate_hz", self.outer_rate_hz),
            ("ring_freq_hz", self.ring_freq_hz),
            ("ring_decay", self.ring_decay),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SignalError::InvalidSynth(format!("{name} must be positive")));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SignalError::InvalidSynth("noise_sigma must be >= 0".into()));
        }
        if !self.impulse_amp.is_finite() {
            return Err(SignalError::InvalidSynth("impulse_amp must be finite".into()));
        }
        Ok(())
    }

    fn impulse_rate(&self, condition: Condition) -> Option<f64> {
        match condition {
            Condition::Healthy => None,
            Condition::Ball => Some(self.ball_rate_hz),
            Condition::InnerRace => Some(self.inner_rate_hz),
            Condition::OuterRace => Some(self.outer_rate_hz),
        }
    }
}

/// Generates a record: shaft sinusoid plus Gaussian noise, and for faulty
/// bearings a periodic train of exponentially decaying resonance bursts.
///
/// The noise sequence depends only on the seed, so a fault with zero
/// amplitude reproduces the healthy signal exactly.
pub fn synth_signal(
    config: &SynthConfig,
    condition: Condition,
    fault_diameter_in: Option<f64>,
    duration_s: f64,
) -> Result<SignalRecord, SignalError> {
    config.validate()?;
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(SignalError::InvalidSynth("duration must be positive".into()));
    }
    let diameter = match (condition, fault_diameter_in) {
        (Condition::Healthy, _) => None,
        (_, Some(d)) => Some(d),
        (_, None) => Some(FAULT_DIAMETERS_IN[0]),
    };
    let meta = RecordMeta::new(config.rpm.round() as u32, condition, diameter)?;

    let n = (duration_s * config.sample_rate_hz).round() as usize;
    if n == 0 {
        return Err(SignalError::InvalidSynth("duration yields no samples".into()));
    }
    let dt = 1.0 / config.sample_rate_hz;
    let shaft_hz = config.rpm / 60.0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            (2.0 * PI * shaft_hz * t).sin() + config.noise_sigma * normal.sample(&mut rng)
        })
        .collect();

    if let (Some(rate), Some(d)) = (config.impulse_rate(condition), diameter) {
        let amp = config.impulse_amp * d / FAULT_DIAMETERS_IN[0];
        if amp != 0.0 {
            add_impulse_train(&mut samples, config, rate, amp);
        }
    }

    SignalRecord::new(samples, config.sample_rate_hz, meta)
}

fn add_impulse_train(samples: &mut [f64], config: &SynthConfig, rate_hz: f64, amp: f64) {
    let dt = 1.0 / config.sample_rate_hz;
    let period = 1.0 / rate_hz;
    // bursts are negligible after ~12 time constants (e^-12 < 1e-5)
    let tail = ((12.0 / config.ring_decay) / dt).ceil() as usize;
    let total = samples.len() as f64 * dt;
    let mut k = 0usize;
    loop {
        let onset = k as f64 * period;
        if onset >= total {
            break;
        }
        let first = (onset / dt).ceil() as usize;
        let last = (first + tail).min(samples.len());
        for (i, s) in samples.iter_mut().enumerate().take(last).skip(first) {
            let tau = i as f64 * dt - onset;
            *s += amp * (-config.ring_decay * tau).exp() * (2.0 * PI * config.ring_freq_hz * tau).sin();
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize) -> SignalRecord {
        let meta = RecordMeta::new(1797, Condition::Healthy, None).unwrap();
        SignalRecord::new((0..n).map(|i| i as f64).collect(), 12_000.0, meta).unwrap()
    }

    #[test]
    fn segments_paper_class_size() {
        assert_eq!(segment_record(&record(120_000), 1000).unwrap().len(), 120);
    }

    #[test]
    fn segments_exact_fit() {
        let segs = segment_record(&record(1000), 1000).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].index, 0);
    }

    #[test]
    fn segments_drop_remainder() {
        let segs = segment_record(&record(2500), 1000).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[1].samples[0], 1000.0);
        assert_eq!(*segs[1].samples.last().unwrap(), 1999.0);
    }

    #[test]
    fn segment_rejects_short_record() {
        assert_eq!(
            segment_record(&record(999), 1000),
            Err(SignalError::InsufficientSamples { needed: 1000, got: 999 })
        );
        assert_eq!(segment_record(&record(10), 1), Err(SignalError::SegmentLength(1)));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            minmax_normalize(&[0.0, 5.0, 10.0], -1.0, 1.0).unwrap(),
            vec![-1.0, 0.0, 1.0]
        );
        assert_eq!(minmax_normalize(&[3.0, 3.0, 3.0], 0.0, 1.0).unwrap(), vec![0.0; 3]);
        let v = minmax_normalize(&[1.0, 2.0, 4.0], 0.0, 1.0).unwrap();
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(v[2], 1.0);
        assert_eq!(minmax_normalize(&[], 0.0, 1.0), Err(SignalError::Empty));
        assert!(minmax_normalize(&[1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn meta_diameter_rules() {
        assert!(RecordMeta::new(1797, Condition::Healthy, Some(0.007)).is_err());
        assert!(RecordMeta::new(1797, Condition::Ball, None).is_err());
        assert!(RecordMeta::new(1797, Condition::Ball, Some(0.007)).is_ok());
    }

    #[test]
    fn synth_is_deterministic() {
        let cfg = SynthConfig::for_rpm(1797.0, 42);
        let a = synth_signal(&cfg, Condition::InnerRace, Some(0.014), 0.5).unwrap();
        let b = synth_signal(&cfg, Condition::InnerRace, Some(0.014), 0.5).unwrap();
        assert_eq!(a.samples.len(), 6000);
        assert!(a
            .samples
            .iter()
            .zip(&b.samples)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn synth_zero_amplitude_matches_healthy() {
        let mut cfg = SynthConfig::for_rpm(1750.0, 7);
        cfg.impulse_amp = 0.0;
        let healthy = synth_signal(&cfg, Condition::Healthy, None, 0.2).unwrap();
        let fault = synth_signal(&cfg, Condition::OuterRace, Some(0.021), 0.2).unwrap();
        assert_eq!(healthy.samples, fault.samples);
    }

    #[test]
    fn synth_healthy_noise_free_has_shaft_period() {
        let mut cfg = SynthConfig::for_rpm(1800.0, 1);
        cfg.noise_sigma = 0.0;
        let rec = synth_signal(&cfg, Condition::Healthy, None, 0.5).unwrap();
        // expected period: 12000 / (1800/60) = 400 samples
        let x = &rec.samples;
        let window = 2000;
        let autocorr = |lag: usize| -> f64 { (0..window).map(|i| x[i] * x[i + lag]).sum() };
        let best = (200..600).max_by(|&a, &b| autocorr(a).total_cmp(&autocorr(b))).unwrap();
        assert_eq!(best, 400);
    }

    #[test]
    fn synth_rejects_bad_config() {
        let mut cfg = SynthConfig::for_rpm(1797.0, 0);
        cfg.noise_sigma = -1.0;
        assert!(synth_signal(&cfg, Condition::Healthy, None, 1.0).is_err());
        let cfg = SynthConfig::for_rpm(1797.0, 0);
        assert!(synth_signal(&cfg, Condition::Healthy, None, 0.0).is_err());
    }
}
