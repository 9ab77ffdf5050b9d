use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Ethical school an agent argues from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum School {
    Deontology,
    Utilitarianism,
    VirtueAncient,
    VirtueChristian,
    NaturalLaw,
    /// Moderators and persona-free tutors.
    Neutral,
}

impl School {
    pub const DOCTRINAL: [School; 5] = [
        School::Deontology,
        School::Utilitarianism,
        School::VirtueAncient,
        School::VirtueChristian,
        School::NaturalLaw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            School::Deontology => "DEONTOLOGY",
            School::Utilitarianism => "UTILITARIANISM",
            School::VirtueAncient => "VIRTUE_ANCIENT",
            School::VirtueChristian => "VIRTUE_CHRISTIAN",
            School::NaturalLaw => "NATURAL_LAW",
            School::Neutral => "NEUTRAL",
        }
    }

    /// File stem used for the school's framework keyword list.
    pub fn file_stem(self) -> &'static str {
        match self {
            School::Deontology => "deontology",
            School::Utilitarianism => "utilitarianism",
            School::VirtueAncient => "virtue_ancient",
            School::VirtueChristian => "virtue_christian",
            School::NaturalLaw => "natural_law",
            School::Neutral => "neutral",
        }
    }
}

impl fmt::Display for School {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for School {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.trim().to_ascii_uppercase().replace(['-', ' '], "_");
        [School::Neutral]
            .into_iter()
            .chain(School::DOCTRINAL)
            .find(|sc| sc.as_str() == up)
            .ok_or_else(|| format!("unknown school `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_loose_spellings() {
        assert_eq!("natural-law".parse::<School>(), Ok(School::NaturalLaw));
        assert_eq!("Deontology".parse::<School>(), Ok(School::Deontology));
        assert!("stoicism".parse::<School>().is_err());
    }

    #[test]
    fn serde_uses_screaming_case() {
        let s = serde_json::to_string(&School::VirtueChristian).unwrap();
        assert_eq!(s, "\"VIRTUE_CHRISTIAN\"");
    }
}
