use std::fmt;
use std::str::FromStr;

use super::IngestError;
use crate::signal::{Condition, FAULT_DIAMETERS_IN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Healthy, ball, inner race, outer race.
    FourClass,
    /// Healthy plus each (location, diameter) pair.
    TenClass,
}

impl Scheme {
    pub fn num_classes(self) -> usize {
        match self {
            Scheme::FourClass => 4,
            Scheme::TenClass => 10,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Scheme::FourClass => "four",
            Scheme::TenClass => "ten",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "four" | "4" => Ok(Scheme::FourClass),
            "ten" | "10" => Ok(Scheme::TenClass),
            other => Err(format!("unknown scheme '{other}' (valid: four, ten)")),
        }
    }
}

/// One-based class id under a labelling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaultLabel {
    pub scheme: Scheme,
    pub value: u8,
}

impl FaultLabel {
    /// Zero-based index used by the network.
    pub fn index(self) -> usize {
        usize::from(self.value) - 1
    }
}

impl PartialOrd for Scheme {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheme {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.num_classes().cmp(&other.num_classes())
    }
}

fn diameter_rank(d: f64) -> Result<u8, IngestError> {
    FAULT_DIAMETERS_IN
        .iter()
        .position(|&known| (known - d).abs() < 1e-6)
        .map(|p| p as u8)
        .ok_or(IngestError::UnknownDiameter(d))
}

/// Class label for a bearing condition:
///
/// | condition | diameter | four | ten |
/// |-----------|----------|------|-----|
/// | healthy   | none     | 1    | 1   |
/// | ball      | .007/.014/.021 | 2 | 2/3/4 |
/// | inner race| .007/.014/.021 | 3 | 5/6/7 |
/// | outer race| .007/.014/.021 | 4 | 8/9/10 |
pub fn label_for(
    condition: Condition,
    fault_diameter_in: Option<f64>,
    scheme: Scheme,
) -> Result<FaultLabel, IngestError> {
    let location = match condition {
        Condition::Healthy => 0u8,
        Condition::Ball => 1,
        Condition::InnerRace => 2,
        Condition::OuterRace => 3,
    };
    let value = match (scheme, condition) {
        (_, Condition::Healthy) => 1,
        (Scheme::FourClass, _) => {
            // still validate the diameter so both schemes accept the same records
            diameter_rank(fault_diameter_in.ok_or(IngestError::UnknownDiameter(f64::NAN))?)?;
            location + 1
        }
        (Scheme::TenClass, _) => {
            let rank = diameter_rank(fault_diameter_in.ok_or(IngestError::UnknownDiameter(f64::NAN))?)?;
            2 + 3 * (location - 1) + rank
        }
    };
    Ok(FaultLabel { scheme, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let l = |c, d, s| label_for(c, d, s).unwrap().value;
        assert_eq!(l(Condition::InnerRace, Some(0.014), Scheme::TenClass), 6);
        assert_eq!(l(Condition::Healthy, None, Scheme::FourClass), 1);
        assert_eq!(l(Condition::OuterRace, Some(0.021), Scheme::FourClass), 4);
        assert_eq!(l(Condition::Ball, Some(0.007), Scheme::TenClass), 2);
        assert_eq!(l(Condition::Ball, Some(0.021), Scheme::TenClass), 4);
        assert_eq!(l(Condition::OuterRace, Some(0.021), Scheme::TenClass), 10);
    }

    #[test]
    fn bijection_and_fibers() {
        let mut ten = Vec::new();
        let mut four = [0usize; 4];
        let rows = std::iter::once((Condition::Healthy, None)).chain(
            [Condition::Ball, Condition::InnerRace, Condition::OuterRace]
                .into_iter()
                .flat_map(|c| FAULT_DIAMETERS_IN.map(|d| (c, Some(d)))),
        );
        for (c, d) in rows {
            ten.push(label_for(c, d, Scheme::TenClass).unwrap().value);
            four[label_for(c, d, Scheme::FourClass).unwrap().index()] += 1;
        }
        ten.sort();
        assert_eq!(ten, (1..=10).collect::<Vec<u8>>());
        assert_eq!(four, [1, 3, 3, 3]);
    }

    #[test]
    fn unknown_diameter() {
        assert!(matches!(
            label_for(Condition::Ball, Some(0.028), Scheme::TenClass),
            Err(IngestError::UnknownDiameter(_))
        ));
        assert!(label_for(Condition::Ball, None, Scheme::FourClass).is_err());
    }
}
