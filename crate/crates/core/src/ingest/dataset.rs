use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::labels::{label_for, FaultLabel, Scheme};
use super::IngestError;
use crate::signal::{segment_record, Segment, SignalRecord, CWRU_RPMS, DEFAULT_SEGMENT_LEN};

/// Motor speeds an experiment draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RpmSubset {
    #[default]
    All,
    One(u32),
}

impl RpmSubset {
    pub fn contains(self, rpm: u32) -> bool {
        match self {
            RpmSubset::All => true,
            RpmSubset::One(r) => r == rpm,
        }
    }
}

impl fmt::Display for RpmSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RpmSubset::All => f.write_str("all"),
            RpmSubset::One(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for RpmSubset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(RpmSubset::All);
        }
        match s.parse::<u32>() {
            Ok(r) if CWRU_RPMS.contains(&r) => Ok(RpmSubset::One(r)),
            _ => Err(format!("unknown rpm '{s}' (valid: 1730, 1750, 1772, 1797, all)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub scheme: Scheme,
    pub segments_per_class_per_rpm: usize,
    pub segment_len: usize,
    pub seed: u64,
}

impl DatasetConfig {
    pub fn new(scheme: Scheme, seed: u64) -> Self {
        DatasetConfig {
            scheme,
            segments_per_class_per_rpm: 120,
            segment_len: DEFAULT_SEGMENT_LEN,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<(Segment, FaultLabel)>,
    pub test: Vec<(Segment, FaultLabel)>,
    pub seed: u64,
}

/// [`assemble_dataset_with`] using the default 1000-sample segments.
pub fn assemble_dataset(
    records: &[SignalRecord],
    scheme: Scheme,
    segments_per_class_per_rpm: usize,
    seed: u64,
) -> Result<DatasetSplit, IngestError> {
    assemble_dataset_with(
        records,
        &DatasetConfig {
            segments_per_class_per_rpm,
            ..DatasetConfig::new(scheme, seed)
        },
    )
}

/// Builds a balanced, shuffled, stratified 80/20 split.
///
/// Exactly `segments_per_class_per_rpm` segments are drawn for every class at
/// every motor speed present in `records`. When several records feed one
/// class (the fault diameters under the four-class scheme), draws alternate
/// between them. Each class is split with `floor(n / 5)` test segments, so any
/// rounding favours the training set. Everything is driven by one seeded
/// generator in a fixed order.
pub fn assemble_dataset_with(records: &[SignalRecord], config: &DatasetConfig) -> Result<DatasetSplit, IngestError> {
    let per = config.segments_per_class_per_rpm;
    if per == 0 {
        return Err(IngestError::Config(
            "segments per class per rpm must be positive".into(),
        ));
    }

    // (label, rpm) -> segments of each contributing record
    let mut groups: BTreeMap<(FaultLabel, u32), Vec<Vec<Segment>>> = BTreeMap::new();
    for record in records {
        let label = label_for(record.meta.condition, record.meta.fault_diameter_in, config.scheme)?;
        let segments = if record.samples.len() >= config.segment_len {
            segment_record(record, config.segment_len)?
        } else {
            Vec::new()
        };
        groups.entry((label, record.meta.rpm)).or_default().push(segments);
    }
    let rpms: BTreeSet<u32> = groups.keys().map(|&(_, rpm)| rpm).collect();
    let labels: Vec<FaultLabel> = (1..=config.scheme.num_classes() as u8)
        .map(|value| FaultLabel {
            scheme: config.scheme,
            value,
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut per_class: BTreeMap<FaultLabel, Vec<Segment>> = BTreeMap::new();
    for &label in &labels {
        for &rpm in &rpms {
            let sources = groups.get_mut(&(label, rpm));
            let available = sources.as_ref().map_or(0, |s| s.iter().map(Vec::len).sum::<usize>());
            if available < per {
                return Err(IngestError::Insufficient {
                    class: label.value,
                    rpm,
                    needed: per,
                    available,
                });
            }
            let sources = sources.expect("non-empty group");
            for segs in sources.iter_mut() {
                segs.shuffle(&mut rng);
                segs.reverse();
            }
            let chosen = per_class.entry(label).or_default();
            let mut taken = 0;
            while taken < per {
                for segs in sources.iter_mut() {
                    if taken == per {
                        break;
                    }
                    if let Some(seg) = segs.pop() {
                        chosen.push(seg);
                        taken += 1;
                    }
                }
            }
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut segments) in per_class {
        segments.shuffle(&mut rng);
        let n_test = segments.len() / 5;
        let n_train = segments.len() - n_test;
        let mut it = segments.into_iter();
        train.extend(it.by_ref().take(n_train).map(|s| (s, label)));
        test.extend(it.map(|s| (s, label)));
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok(DatasetSplit {
        train,
        test,
        seed: config.seed,
    })
}
