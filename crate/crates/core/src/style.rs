//! Felder–Silverman dimensions and Index of Learning Styles scoring.

use alloc::format;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of questionnaire items per dimension.
pub const ITEMS_PER_DIMENSION: usize = 11;
/// Total questionnaire length.
pub const ILS_ITEMS: usize = 4 * ITEMS_PER_DIMENSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Processing,
    Input,
    Understanding,
    Perception,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Processing,
        Dimension::Input,
        Dimension::Understanding,
        Dimension::Perception,
    ];

    /// Pole names, first pole first. The first pole is the one a positive
    /// ILS score points to.
    pub fn poles(self) -> (&'static str, &'static str) {
        match self {
            Dimension::Processing => ("active", "reflective"),
            Dimension::Input => ("visual", "verbal"),
            Dimension::Understanding => ("sequential", "global"),
            Dimension::Perception => ("sensing", "intuitive"),
        }
    }

    pub fn pole_name(self, pole: Pole) -> &'static str {
        match pole {
            Pole::First => self.poles().0,
            Pole::Second => self.poles().1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Processing => "processing",
            Dimension::Input => "input",
            Dimension::Understanding => "understanding",
            Dimension::Perception => "perception",
        }
    }

    /// Position of this dimension's block in the 44-item answer sheet.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Dimension::ALL
            .into_iter()
            .find(|d| {
                let (a, b) = d.poles();
                lower == d.name() || lower == a || lower == b
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown dimension `{s}`")))
    }
}

/// One side of a dimension. `First` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pole {
    First,
    Second,
}

impl Pole {
    /// Pole for a decision score; zero goes to the first pole.
    pub fn from_score(score: f64) -> Pole {
        if score >= 0.0 {
            Pole::First
        } else {
            Pole::Second
        }
    }

    /// `+1` for the first pole, `-1` for the second.
    pub fn sign(self) -> f64 {
        match self {
            Pole::First => 1.0,
            Pole::Second => -1.0,
        }
    }

    pub fn flip(self) -> Pole {
        match self {
            Pole::First => Pole::Second,
            Pole::Second => Pole::First,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Balanced,
    Moderate,
    Strong,
}

/// A student's position on one dimension.
///
/// Questionnaire-derived labels carry the raw score and its strength band;
/// labels produced by a classifier or a generator carry only the pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionLabel {
    pub dimension: Dimension,
    pub pole: Pole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<Strength>,
}

impl DimensionLabel {
    pub fn pole_only(dimension: Dimension, pole: Pole) -> Self {
        Self {
            dimension,
            pole,
            score: None,
            strength: None,
        }
    }
}

/// One answer on the questionnaire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    A,
    B,
}

/// A validated 44-item answer sheet, 11 items per dimension in
/// [`Dimension::ALL`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlsResponse {
    answers: [Answer; ILS_ITEMS],
}

impl IlsResponse {
    pub fn new(answers: &[Answer]) -> Result<Self> {
        if answers.len() != ILS_ITEMS {
            return Err(Error::InvalidIls {
                position: answers.len(),
                message: format!("expected 44 answers, got {}", answers.len()),
            });
        }
        let mut sheet = [Answer::A; ILS_ITEMS];
        sheet.copy_from_slice(answers);
        Ok(Self { answers: sheet })
    }

    /// Parses a run of `a`/`b` symbols (case-insensitive). Whitespace and
    /// commas between symbols are ignored. Positions in errors are 1-based.
    pub fn parse(symbols: &str) -> Result<Self> {
        let mut answers = alloc::vec::Vec::with_capacity(ILS_ITEMS);
        for c in symbols.chars().filter(|c| !c.is_whitespace() && *c != ',') {
            let answer = match c {
                'a' | 'A' => Answer::A,
                'b' | 'B' => Answer::B,
                other => {
                    return Err(Error::InvalidIls {
                        position: answers.len() + 1,
                        message: format!("expected 'a' or 'b', got {other:?}"),
                    })
                }
            };
            answers.push(answer);
        }
        Self::new(&answers)
    }

    pub fn answers(&self) -> &[Answer; ILS_ITEMS] {
        &self.answers
    }

    pub fn block(&self, dimension: Dimension) -> &[Answer] {
        let start = dimension.index() * ITEMS_PER_DIMENSION;
        &self.answers[start..start + ITEMS_PER_DIMENSION]
    }
}

/// Score for one dimension's 11 answers: `#a - #b`.
pub fn score_block(block: &[Answer]) -> i32 {
    block
        .iter()
        .map(|a| match a {
            Answer::A => 1,
            Answer::B => -1,
        })
        .sum()
}

/// Per-dimension scores in [`Dimension::ALL`] order.
pub fn score_ils(response: &IlsResponse) -> [i32; 4] {
    Dimension::ALL.map(|d| score_block(response.block(d)))
}

pub fn label_from_score(dimension: Dimension, score: i32) -> Result<DimensionLabel> {
    if score % 2 == 0 || !(-11..=11).contains(&score) {
        return Err(Error::InvalidScore(score));
    }
    let strength = match score.abs() {
        1 | 3 => Strength::Balanced,
        5 | 7 => Strength::Moderate,
        _ => Strength::Strong,
    };
    Ok(DimensionLabel {
        dimension,
        pole: if score > 0 { Pole::First } else { Pole::Second },
        score: Some(score),
        strength: Some(strength),
    })
}

/// Scores a response and labels all four dimensions.
pub fn label_response(response: &IlsResponse) -> [DimensionLabel; 4] {
    let scores = score_ils(response);
    Dimension::ALL.map(|d| label_from_score(d, scores[d.index()]).expect("11 answers always give an odd score"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec::Vec;

    #[test]
    fn all_a_scores_plus_eleven() {
        let r = IlsResponse::parse(&"a".repeat(44)).unwrap();
        assert_eq!(score_ils(&r), [11, 11, 11, 11]);
    }

    #[test]
    fn six_a_five_b_scores_one() {
        let mut s = String::from("aaaaaabbbbb");
        s.push_str(&"b".repeat(33));
        let r = IlsResponse::parse(&s).unwrap();
        assert_eq!(score_ils(&r), [1, -11, -11, -11]);
    }

    #[test]
    fn wrong_length_names_expected_count() {
        let err = IlsResponse::parse(&"a".repeat(43)).unwrap_err();
        assert!(format!("{err}").contains("expected 44 answers"));
    }

    #[test]
    fn bad_symbol_names_position() {
        let mut s = "a".repeat(44);
        s.replace_range(9..10, "c");
        match IlsResponse::parse(&s) {
            Err(Error::InvalidIls { position, .. }) => assert_eq!(position, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn banding_examples() {
        let l = label_from_score(Dimension::Input, 9).unwrap();
        assert_eq!((l.pole, l.strength), (Pole::First, Some(Strength::Strong)));
        assert_eq!(Dimension::Input.pole_name(l.pole), "visual");
        let l = label_from_score(Dimension::Understanding, -1).unwrap();
        assert_eq!((l.pole, l.strength), (Pole::Second, Some(Strength::Balanced)));
        assert_eq!(Dimension::Understanding.pole_name(l.pole), "global");
        assert!(label_from_score(Dimension::Processing, 0).is_err());
        assert!(label_from_score(Dimension::Processing, 13).is_err());
        assert!(label_from_score(Dimension::Processing, -4).is_err());
    }

    #[test]
    fn moderate_band() {
        for s in [5, 7, -5, -7] {
            assert_eq!(
                label_from_score(Dimension::Perception, s).unwrap().strength,
                Some(Strength::Moderate)
            );
        }
    }

    #[test]
    fn dimension_names_parse() {
        assert_eq!("Input".parse::<Dimension>().unwrap(), Dimension::Input);
        assert_eq!("reflective".parse::<Dimension>().unwrap(), Dimension::Processing);
        assert!("color".parse::<Dimension>().is_err());
        let all: Vec<_> = Dimension::ALL.iter().map(|d| d.index()).collect();
        assert_eq!(all, [0, 1, 2, 3]);
    }

    #[test]
    fn zero_score_goes_to_first_pole() {
        assert_eq!(Pole::from_score(0.0), Pole::First);
        assert_eq!(Pole::from_score(-0.0), Pole::First);
        assert_eq!(Pole::from_score(-1e-300), Pole::Second);
    }
}
