// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::graph::HarmScore;

/// How a provider's rating maps onto the harm scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RatingScale {
    /// Numeric scale `[min, max]`, linearly rescaled to `[0, 100]`.
    Linear {
        min: f64,
        max: f64,
        higher_is_better: bool,
    },
    /// Ordered letter grades, best first. Grades are spaced evenly.
    Graded { grades: Vec<String> },
}

impl RatingScale {
    /// A 0-100 score where 100 is best.
    pub fn inverted_percent() -> Self {
        RatingScale::Linear {
            min: 0.0,
            max: 100.0,
            higher_is_better: true,
        }
    }

    /// Seven-step letter scale, AAA best.
    pub fn letter_grades() -> Self {
        RatingScale::Graded {
            grades: ["AAA", "AA", "A", "BBB", "BB", "B", "CCC"].map(String::from).to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rating<'a> {
    Score(f64),
    Grade(&'a str),
}

pub fn harm_from_rating(rating: Rating<'_>, scale: &RatingScale) -> Result<HarmScore, IngestError> {
    let value = match (scale, rating) {
        (
            RatingScale::Linear {
                min,
                max,
                higher_is_better,
            },
            Rating::Score(s),
        ) => {
            if !(min.is_finite() && max.is_finite() && min < max) {
                return Err(IngestError::InvalidScale(format!("bounds [{min}, {max}]")));
            }
            if !(s.is_finite() && (*min..=*max).contains(&s)) {
                return Err(IngestError::OutOfScale {
                    score: s,
                    min: *min,
                    max: *max,
                });
            }
            let t = (s - min) / (max - min);
            100.0 * if *higher_is_better { 1.0 - t } else { t }
        }
        (RatingScale::Graded { grades }, Rating::Grade(g)) => {
            if grades.len() < 2 {
                return Err(IngestError::InvalidScale("need at least two grades".into()));
            }
            let g = g.trim();
            let idx = grades
                .iter()
                .position(|x| x.eq_ignore_ascii_case(g))
                .ok_or_else(|| IngestError::UnknownGrade(g.to_string()))?;
            100.0 * idx as f64 / (grades.len() - 1) as f64
        }
        (RatingScale::Linear { .. }, Rating::Grade(g)) => {
            return Err(IngestError::UnknownGrade(g.to_string()))
        }
        (RatingScale::Graded { .. }, Rating::Score(s)) => {
            return Err(IngestError::InvalidScale(format!("numeric rating {s} on a graded scale")))
        }
    };
    Ok(HarmScore::new(value.clamp(0.0, 100.0)).expect("clamped"))
}
