//! Mapping log events onto behavioural feature counts.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The textual fields of a log event that rules can match on.
pub trait LogEvent {
    fn user_id(&self) -> &str;
    fn event_name(&self) -> &str;
    fn component(&self) -> &str;
    fn event_context(&self) -> &str;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventField {
    EventName,
    Component,
    EventContext,
}

/// `field` contains `contains` (ASCII case-insensitive) → count towards `feature`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRule {
    pub field: EventField,
    pub contains: String,
    pub feature: String,
}

impl MappingRule {
    fn matches<E: LogEvent + ?Sized>(&self, event: &E, needle_lower: &str) -> bool {
        let hay = match self.field {
            EventField::EventName => event.event_name(),
            EventField::Component => event.component(),
            EventField::EventContext => event.event_context(),
        };
        contains_ignore_ascii_case(hay, needle_lower)
    }
}

fn contains_ignore_ascii_case(hay: &str, needle_lower: &str) -> bool {
    if needle_lower.is_empty() {
        return true;
    }
    let hay = hay.as_bytes();
    let needle = needle_lower.as_bytes();
    hay.windows(needle.len())
        .any(|w| w.iter().zip(needle).all(|(h, n)| h.to_ascii_lowercase() == *n))
}

/// Ordered rules; the first matching rule decides the feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapping {
    pub feature_names: Vec<String>,
    pub rules: Vec<MappingRule>,
}

impl FeatureMapping {
    pub fn validate(&self) -> Result<()> {
        if self.feature_names.is_empty() {
            return Err(Error::InvalidConfig("mapping has no feature names".into()));
        }
        for (i, name) in self.feature_names.iter().enumerate() {
            if self.feature_names[..i].contains(name) {
                return Err(Error::InvalidConfig(format!("duplicate feature name `{name}`")));
            }
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if !self.feature_names.contains(&rule.feature) {
                return Err(Error::InvalidConfig(format!(
                    "rule {} targets unknown feature `{}`",
                    i + 1,
                    rule.feature
                )));
            }
        }
        Ok(())
    }

    /// Index into `feature_names` of the first rule matching `event`.
    pub fn classify<E: LogEvent + ?Sized>(&self, event: &E) -> Option<usize> {
        self.compiled().classify(event)
    }

    fn compiled(&self) -> CompiledMapping<'_> {
        CompiledMapping {
            rules: self
                .rules
                .iter()
                .map(|r| {
                    let target = self
                        .feature_names
                        .iter()
                        .position(|f| *f == r.feature)
                        .unwrap_or(usize::MAX);
                    (r, r.contains.to_ascii_lowercase(), target)
                })
                .collect(),
        }
    }
}

struct CompiledMapping<'a> {
    rules: Vec<(&'a MappingRule, String, usize)>,
}

impl CompiledMapping<'_> {
    fn classify<E: LogEvent + ?Sized>(&self, event: &E) -> Option<usize> {
        self.rules
            .iter()
            .find(|(rule, needle, _)| rule.matches(event, needle))
            .map(|(_, _, target)| *target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentProfile {
    pub user_id: String,
    pub counts: Vec<u64>,
    pub unmapped_events: u64,
}

impl StudentProfile {
    pub fn total_events(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.unmapped_events
    }
}

/// One profile per distinct user, in order of first appearance.
pub fn build_profiles<E: LogEvent>(events: &[E], mapping: &FeatureMapping) -> Result<Vec<StudentProfile>> {
    mapping.validate()?;
    let compiled = mapping.compiled();
    let width = mapping.feature_names.len();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut profiles: Vec<StudentProfile> = Vec::new();
    for event in events {
        let slot = *index.entry(event.user_id()).or_insert_with(|| {
            profiles.push(StudentProfile {
                user_id: event.user_id().into(),
                counts: vec![0; width],
                unmapped_events: 0,
            });
            profiles.len() - 1
        });
        let profile = &mut profiles[slot];
        match compiled.classify(event) {
            Some(f) => profile.counts[f] += 1,
            None => profile.unmapped_events += 1,
        }
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Ev(&'static str, &'static str, &'static str, &'static str);

    impl LogEvent for Ev {
        fn user_id(&self) -> &str {
            self.0
        }
        fn event_name(&self) -> &str {
            self.1
        }
        fn component(&self) -> &str {
            self.2
        }
        fn event_context(&self) -> &str {
            self.3
        }
    }

    fn rule(field: EventField, contains: &str, feature: &str) -> MappingRule {
        MappingRule {
            field,
            contains: contains.into(),
            feature: feature.into(),
        }
    }

    fn mapping() -> FeatureMapping {
        FeatureMapping {
            feature_names: vec![
                "visual_materials".into(),
                "quiz_submitted".into(),
                "course_reviews".into(),
            ],
            rules: vec![
                rule(EventField::EventContext, "Video", "visual_materials"),
                rule(EventField::Component, "Quiz", "quiz_submitted"),
                rule(EventField::EventName, "course viewed", "course_reviews"),
            ],
        }
    }

    #[test]
    fn counts_video_events() {
        let events: Vec<_> = (0..5)
            .map(|_| Ev("u1", "Course module viewed", "vidtrack", "Video: Health Informatics"))
            .collect();
        let p = build_profiles(&events, &mapping()).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].counts, vec![5, 0, 0]);
        assert_eq!(p[0].unmapped_events, 0);
    }

    #[test]
    fn unmatched_event_is_tallied() {
        let events = [Ev("u1", "Grade user report viewed", "User report", "SKILLS")];
        let p = build_profiles(&events, &mapping()).unwrap();
        assert_eq!(p[0].counts, vec![0, 0, 0]);
        assert_eq!(p[0].unmapped_events, 1);
    }

    #[test]
    fn interleaved_users_are_separated() {
        let events = [
            Ev("a", "Course viewed", "System", "X"),
            Ev("b", "Course module viewed", "Quiz", "Problem Solving"),
            Ev("a", "Course module viewed", "File", "Video: intro"),
            Ev("b", "Course viewed", "System", "X"),
            Ev("b", "Course viewed", "System", "X"),
        ];
        let p = build_profiles(&events, &mapping()).unwrap();
        assert_eq!(p[0].user_id, "a");
        assert_eq!(p[0].counts, vec![1, 0, 1]);
        assert_eq!(p[1].user_id, "b");
        assert_eq!(p[1].counts, vec![0, 1, 2]);
        assert_eq!(p[0].total_events() + p[1].total_events(), 5);
    }

    #[test]
    fn first_matching_rule_wins() {
        // matches both the video rule and the quiz rule
        let events = [Ev("u", "Course module viewed", "Quiz", "Video quiz")];
        let p = build_profiles(&events, &mapping()).unwrap();
        assert_eq!(p[0].counts, vec![1, 0, 0]);
    }

    #[test]
    fn invalid_mappings_are_rejected() {
        let mut m = mapping();
        m.rules.push(rule(EventField::Component, "H5P", "interactive"));
        assert!(m.validate().is_err());
        let mut m = mapping();
        m.feature_names.push("quiz_submitted".into());
        assert!(m.validate().is_err());
        let m = FeatureMapping {
            feature_names: vec![],
            rules: vec![],
        };
        assert!(m.validate().is_err());
    }

    #[test]
    fn matching_ignores_ascii_case() {
        assert!(contains_ignore_ascii_case("Course VIEWED", "course viewed"));
        assert!(!contains_ignore_ascii_case("Course", "course viewed"));
    }
}
