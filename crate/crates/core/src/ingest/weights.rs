use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{IngestError, TableSet, WeightBasis};
use crate::scalar::Weight;

/// How a project's value is spread over the calendar years it spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Apportionment {
    /// Active days in the year over the project's total days (value-conserving).
    #[default]
    Duration,
    /// Active days in the year over 365 (does not conserve multi-year value).
    Days365,
}

/// Organisation × project weights (kEUR) for one calendar year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearlyWeights<W> {
    pub year: i32,
    pub basis: WeightBasis,
    /// `(orgID, projID) → weight`. Zero-valued participations are kept.
    pub entries: BTreeMap<(String, String), W>,
}

impl<W: Weight> YearlyWeights<W> {
    pub fn new(year: i32, basis: WeightBasis) -> Self {
        YearlyWeights {
            year,
            basis,
            entries: BTreeMap::new(),
        }
    }

    pub fn total(&self) -> W {
        self.entries.values().copied().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Participants of each project with their weights, ordered by projID then orgID.
    pub fn by_project(&self) -> BTreeMap<&str, Vec<(&str, W)>> {
        let mut out: BTreeMap<&str, Vec<(&str, W)>> = BTreeMap::new();
        for ((org, proj), w) in &self.entries {
            out.entry(proj.as_str()).or_default().push((org.as_str(), *w));
        }
        out
    }

    /// Organisations with at least one strictly positive entry.
    pub fn active_orgs(&self) -> BTreeSet<&str> {
        self.entries
            .iter()
            .filter(|(_, w)| **w > W::zero())
            .map(|((org, _), _)| org.as_str())
            .collect()
    }

    /// Number of projects each organisation has an entry in.
    pub fn participation_counts(&self) -> BTreeMap<&str, usize> {
        let mut out = BTreeMap::new();
        for (org, _) in self.entries.keys() {
            *out.entry(org.as_str()).or_insert(0) += 1;
        }
        out
    }

    /// The same matrix restricted to projects for which `keep` holds.
    pub fn retain_projects(&self, mut keep: impl FnMut(&str) -> bool) -> Self {
        YearlyWeights {
            year: self.year,
            basis: self.basis,
            entries: self
                .entries
                .iter()
                .filter(|((_, p), _)| keep(p))
                .map(|(k, w)| (k.clone(), *w))
                .collect(),
        }
    }
}

/// Number of days from `start` to `end`, both included.
pub fn inclusive_days(start: NaiveDate, end: NaiveDate) -> i64 {
    (end - start).num_days() + 1
}

/// Days of `[start, end]` (inclusive) falling in calendar `year`.
pub fn days_in_year_overlap(start: NaiveDate, end: NaiveDate, year: i32) -> i64 {
    let (Some(jan1), Some(dec31)) = (NaiveDate::from_ymd_opt(year, 1, 1), NaiveDate::from_ymd_opt(year, 12, 31)) else {
        return 0;
    };
    let lo = start.max(jan1);
    let hi = end.min(dec31);
    if hi < lo {
        0
    } else {
        inclusive_days(lo, hi)
    }
}

/// Per-year share of a project's value, in year order.
pub fn year_fractions(start: NaiveDate, end: NaiveDate, rule: Apportionment) -> Vec<(i32, f64)> {
    let total = inclusive_days(start, end) as f64;
    let denominator = match rule {
        Apportionment::Duration => total,
        Apportionment::Days365 => 365.0,
    };
    (start.year()..=end.year())
        .map(|y| (y, days_in_year_overlap(start, end, y) as f64 / denominator))
        .collect()
}

/// Builds one weight matrix per year from the earliest start year to the
/// latest end year of the projects in `tables`, including empty years.
///
/// Returns the matrices and any warnings (zero-duration projects,
/// participations whose project is not in the table).
pub fn compute_weights<W: Weight>(
    tables: &TableSet,
    basis: WeightBasis,
    rule: Apportionment,
) -> Result<(Vec<YearlyWeights<W>>, Vec<String>), IngestError> {
    let mut warnings = Vec::new();
    let Some(first) = tables.projects.iter().map(|p| p.start_date.year()).min() else {
        return Ok((Vec::new(), warnings));
    };
    let last = tables.projects.iter().map(|p| p.end_date.year()).max().unwrap_or(first);
    let mut fractions: HashMap<&str, Vec<(i32, f64)>> = HashMap::new();
    for p in &tables.projects {
        if p.end_date < p.start_date {
            return Err(IngestError::InvalidProject(p.proj_id.clone()));
        }
        if p.end_date == p.start_date {
            warnings.push(format!("project {} has zero duration; value assigned to {}", p.proj_id, p.start_date.year()));
        }
        fractions.insert(&p.proj_id, year_fractions(p.start_date, p.end_date, rule));
    }
    let mut matrices: Vec<YearlyWeights<W>> = (first..=last).map(|y| YearlyWeights::new(y, basis)).collect();
    for part in &tables.participations {
        let Some(shares) = fractions.get(part.proj_id.as_str()) else {
            warnings.push(format!(
                "participation {}/{} references a project outside the table; ignored",
                part.org_id, part.proj_id
            ));
            continue;
        };
        let value = part.value_keur(basis);
        for &(year, share) in shares {
            if share <= 0.0 {
                continue;
            }
            let slot = &mut matrices[(year - first) as usize];
            slot.entries
                .insert((part.org_id.clone(), part.proj_id.clone()), W::of(value * share));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok((matrices, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ParticipationRecord, Programme, ProjectRecord, Role};

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn table(projects: &[(&str, NaiveDate, NaiveDate)], parts: &[(&str, &str, f64)]) -> TableSet {
        TableSet {
            projects: projects
                .iter()
                .map(|(id, s, e)| ProjectRecord {
                    proj_id: id.to_string(),
                    acronym: String::new(),
                    title: String::new(),
                    start_date: *s,
                    end_date: *e,
                    call_id: String::new(),
                    objective: String::new(),
                    programme: Programme::H2020,
                })
                .collect(),
            participations: parts
                .iter()
                .map(|(o, p, v)| ParticipationRecord {
                    org_id: o.to_string(),
                    proj_id: p.to_string(),
                    org_name: String::new(),
                    country_code: String::new(),
                    role: Role::Participant,
                    total_cost: v * 2.0,
                    net_ec_contribution: *v,
                })
                .collect(),
            ..TableSet::default()
        }
    }

    #[test]
    fn single_calendar_year() {
        let t = table(&[("p", d(2020, 1, 1), d(2020, 12, 31))], &[("a", "p", 100_000.0)]);
        let (m, warnings) = compute_weights::<f64>(&t, WeightBasis::NetEcContribution, Apportionment::Duration).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].year, 2020);
        assert!((m[0].total() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn split_across_two_years() {
        // 2020-07-02..2020-12-31 is 183 days, 2021-01-01..2021-07-01 is 182.
        assert_eq!(days_in_year_overlap(d(2020, 7, 2), d(2021, 7, 1), 2020), 183);
        assert_eq!(days_in_year_overlap(d(2020, 7, 2), d(2021, 7, 1), 2021), 182);
        let t = table(&[("p", d(2020, 7, 2), d(2021, 7, 1))], &[("a", "p", 100_000.0)]);
        let (m, _) = compute_weights::<f64>(&t, WeightBasis::NetEcContribution, Apportionment::Duration).unwrap();
        assert!((m[0].total() - 50.137).abs() < 1e-3);
        assert!((m[1].total() - 49.863).abs() < 1e-3);
        assert!((m[0].total() + m[1].total() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn two_orgs_single_year_and_basis_switch() {
        let t = table(&[("p", d(2019, 2, 1), d(2019, 11, 30))], &[("a", "p", 10_000.0), ("b", "p", 30_000.0)]);
        let (m, _) = compute_weights::<f64>(&t, WeightBasis::NetEcContribution, Apportionment::Duration).unwrap();
        let e = &m[0].entries;
        assert!((e[&("a".into(), "p".into())] - 10.0).abs() < 1e-12);
        assert!((e[&("b".into(), "p".into())] - 30.0).abs() < 1e-12);
        let (m, _) = compute_weights::<f64>(&t, WeightBasis::TotalCost, Apportionment::Duration).unwrap();
        assert!((m[0].total() - 80.0).abs() < 1e-12);
    }

    #[test]
    fn zero_duration_goes_to_start_year_with_warning() {
        let t = table(&[("p", d(2021, 5, 5), d(2021, 5, 5)), ("q", d(2019, 1, 1), d(2019, 1, 2))], &[("a", "p", 5000.0)]);
        let (m, warnings) = compute_weights::<f64>(&t, WeightBasis::NetEcContribution, Apportionment::Duration).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(m.len(), 3);
        assert!(m[1].is_empty());
        assert!((m[2].total() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn days365_rule_uses_fixed_denominator() {
        let f = year_fractions(d(2020, 1, 1), d(2021, 12, 31), Apportionment::Days365);
        assert_eq!(f, vec![(2020, 366.0 / 365.0), (2021, 1.0)]);
    }

    #[test]
    fn leap_day_is_counted() {
        assert_eq!(inclusive_days(d(2024, 2, 28), d(2024, 3, 1)), 3);
        assert_eq!(days_in_year_overlap(d(2023, 6, 1), d(2025, 6, 1), 2024), 366);
    }
}
