use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One of the seven rated similarity dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Geography,
    Entities,
    Time,
    Narrative,
    Style,
    Tone,
    Overall,
}

impl MetricKind {
    pub const ALL: [MetricKind; 7] = [
        MetricKind::Geography,
        MetricKind::Entities,
        MetricKind::Time,
        MetricKind::Narrative,
        MetricKind::Style,
        MetricKind::Tone,
        MetricKind::Overall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Geography => "geography",
            MetricKind::Entities => "entities",
            MetricKind::Time => "time",
            MetricKind::Narrative => "narrative",
            MetricKind::Style => "style",
            MetricKind::Tone => "tone",
            MetricKind::Overall => "overall",
        }
    }

    /// Metrics whose features come from named entities rather than the
    /// whole article.
    pub fn is_entity_based(self) -> bool {
        matches!(self, MetricKind::Geography | MetricKind::Entities | MetricKind::Time)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        MetricKind::ALL
            .into_iter()
            .find(|m| m.as_str() == lower)
            .ok_or_else(|| Error::Format(format!("unknown metric {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        assert_eq!(MetricKind::ALL.len(), 7);
        for m in MetricKind::ALL {
            assert_eq!(m.as_str().parse::<MetricKind>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert!("Location".parse::<MetricKind>().is_err());
        assert_eq!("Geography".parse::<MetricKind>().unwrap(), MetricKind::Geography);
    }
}
