use std::collections::{BTreeSet, HashMap, HashSet};

use super::{IngestError, TableSet};

/// Unions two parsed table sets.
///
/// Identical project rows are deduplicated. A projID that appears in both
/// sets with differing content keeps both projects; the second one is renamed
/// to `projID@Programme` and its participations and topics follow it.
/// Participation rows repeated across sets keep the first occurrence.
pub fn merge_programmes(a: TableSet, b: TableSet) -> TableSet {
    let mut merged = TableSet {
        programmes: a.programmes.iter().chain(&b.programmes).copied().collect(),
        rejects: a.rejects,
        counts: a.counts,
        anomalies: a.anomalies,
        ..TableSet::default()
    };
    merged.rejects.extend(b.rejects);
    for (kind, counts) in b.counts {
        merged.counts.entry(kind).or_default().add(counts);
    }
    merged.anomalies.extend(b.anomalies);

    let index: HashMap<String, usize> = a
        .projects
        .iter()
        .enumerate()
        .map(|(i, p)| (p.proj_id.clone(), i))
        .collect();
    merged.projects = a.projects;

    // projIDs of `b` that must be rewritten, and those that are plain duplicates.
    let mut renamed: HashMap<String, String> = HashMap::new();
    for mut project in b.projects {
        match index.get(&project.proj_id) {
            None => merged.projects.push(project),
            Some(&i) if merged.projects[i].same_content(&project) => {
                merged.note(format!("project {} present in both programmes; deduplicated", project.proj_id));
            }
            Some(_) => {
                let new_id = format!("{}@{}", project.proj_id, project.programme);
                merged.note(format!(
                    "projID collision: {} differs between programmes; second copy kept as {new_id}",
                    project.proj_id
                ));
                renamed.insert(project.proj_id.clone(), new_id.clone());
                project.proj_id = new_id;
                merged.projects.push(project);
            }
        }
    }

    let mut seen: HashSet<(String, String)> = HashSet::new();
    for p in a.participations {
        seen.insert((p.org_id.clone(), p.proj_id.clone()));
        merged.participations.push(p);
    }
    for mut p in b.participations {
        if let Some(new_id) = renamed.get(&p.proj_id) {
            p.proj_id = new_id.clone();
        }
        if seen.insert((p.org_id.clone(), p.proj_id.clone())) {
            merged.participations.push(p);
        } else {
            merged.note(format!("duplicate participation {}/{} dropped (kept first)", p.org_id, p.proj_id));
        }
    }

    let mut topic_seen: HashSet<(String, String)> = HashSet::new();
    for t in a.topics {
        topic_seen.insert((t.proj_id.clone(), t.topic_label.clone()));
        merged.topics.push(t);
    }
    for mut t in b.topics {
        if let Some(new_id) = renamed.get(&t.proj_id) {
            t.proj_id = new_id.clone();
        }
        if topic_seen.insert((t.proj_id.clone(), t.topic_label.clone())) {
            merged.topics.push(t);
        }
    }
    merged
}

/// Keeps the projects carrying at least one of `topics`, their topic rows,
/// and the participations in them.
pub fn filter_by_topic(tables: &TableSet, topics: &BTreeSet<String>) -> Result<TableSet, IngestError> {
    if topics.is_empty() {
        return Err(IngestError::EmptyTopicFilter);
    }
    let selected: HashSet<&str> = tables
        .topics
        .iter()
        .filter(|t| topics.contains(&t.topic_label))
        .map(|t| t.proj_id.as_str())
        .collect();
    let mut out = TableSet {
        programmes: tables.programmes.clone(),
        projects: tables
            .projects
            .iter()
            .filter(|p| selected.contains(p.proj_id.as_str()))
            .cloned()
            .collect(),
        rejects: tables.rejects.clone(),
        counts: tables.counts.clone(),
        anomalies: tables.anomalies.clone(),
        ..TableSet::default()
    };
    let kept: HashSet<&str> = out.projects.iter().map(|p| p.proj_id.as_str()).collect();
    out.participations = tables
        .participations
        .iter()
        .filter(|p| kept.contains(p.proj_id.as_str()))
        .cloned()
        .collect();
    out.topics = tables
        .topics
        .iter()
        .filter(|t| kept.contains(t.proj_id.as_str()))
        .cloned()
        .collect();
    if out.projects.is_empty() {
        out.note(format!("topic filter {topics:?} matched no projects"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ParticipationRecord, Programme, ProjectRecord, Role, TopicRecord};
    use chrono::NaiveDate;

    fn project(id: &str, title: &str, programme: Programme) -> ProjectRecord {
        ProjectRecord {
            proj_id: id.into(),
            acronym: id.into(),
            title: title.into(),
            start_date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            end_date: NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
            call_id: String::new(),
            objective: String::new(),
            programme,
        }
    }

    fn part(org: &str, proj: &str) -> ParticipationRecord {
        ParticipationRecord {
            org_id: org.into(),
            proj_id: proj.into(),
            org_name: format!("Org {org}"),
            country_code: "IT".into(),
            role: Role::Participant,
            total_cost: 1000.0,
            net_ec_contribution: 1000.0,
        }
    }

    fn set(programme: Programme, ids: &[&str]) -> TableSet {
        TableSet {
            programmes: vec![programme],
            projects: ids.iter().map(|id| project(id, "t", programme)).collect(),
            ..TableSet::default()
        }
    }

    #[test]
    fn disjoint_union() {
        let m = merge_programmes(set(Programme::H2020, &["1", "2"]), set(Programme::HorizonEurope, &["3", "4", "5"]));
        assert_eq!(m.projects.len(), 5);
        assert!(m.anomalies.is_empty());
    }

    #[test]
    fn identical_participation_deduplicated() {
        let mut a = set(Programme::H2020, &["1"]);
        a.participations.push(part("o", "1"));
        let mut b = set(Programme::HorizonEurope, &[]);
        b.participations.push(part("o", "1"));
        let m = merge_programmes(a, b);
        assert_eq!(m.participations.len(), 1);
        assert_eq!(m.anomalies.len(), 1);
    }

    #[test]
    fn colliding_project_ids_with_different_titles_are_both_kept() {
        let mut a = set(Programme::H2020, &["1"]);
        a.participations.push(part("o", "1"));
        let mut b = TableSet {
            programmes: vec![Programme::HorizonEurope],
            projects: vec![project("1", "other title", Programme::HorizonEurope)],
            ..TableSet::default()
        };
        b.participations.push(part("o", "1"));
        b.topics.push(TopicRecord {
            proj_id: "1".into(),
            topic_label: "x".into(),
        });
        let m = merge_programmes(a, b);
        assert_eq!(m.projects.len(), 2);
        assert_eq!(m.anomalies.len(), 1);
        assert!(m.anomalies[0].contains("collision"));
        assert_eq!(m.participations.len(), 2);
        assert_eq!(m.participations[1].proj_id, "1@HorizonEurope");
        assert_eq!(m.topics[0].proj_id, "1@HorizonEurope");
    }

    #[test]
    fn identical_projects_deduplicated() {
        let a = set(Programme::H2020, &["1"]);
        let b = set(Programme::HorizonEurope, &["1"]);
        let m = merge_programmes(a, b);
        assert_eq!(m.projects.len(), 1);
    }

    fn topical() -> TableSet {
        let mut s = set(Programme::H2020, &["1", "2", "3", "4", "5"]);
        for (p, label) in [("1", "hydrogen energy"), ("2", "solar"), ("3", "hydrogen energy"), ("3", "solar"), ("4", "wind"), ("5", "wind")] {
            s.topics.push(TopicRecord {
                proj_id: p.into(),
                topic_label: label.into(),
            });
        }
        for (o, p) in [("a", "1"), ("b", "1"), ("c", "2"), ("a", "3"), ("d", "4"), ("e", "5")] {
            s.participations.push(part(o, p));
        }
        s
    }

    #[test]
    fn filter_selects_topic_and_participants() {
        let s = topical();
        let f = filter_by_topic(&s, &BTreeSet::from(["hydrogen energy".to_string()])).unwrap();
        assert_eq!(f.projects.len(), 2);
        let orgs: BTreeSet<_> = f.participations.iter().map(|p| p.org_id.as_str()).collect();
        assert_eq!(orgs, BTreeSet::from(["a", "b"]));
        assert_eq!(f.participations.len(), 3);
    }

    #[test]
    fn filter_with_all_labels_is_identity() {
        let s = topical();
        let all: BTreeSet<String> = s.topics.iter().map(|t| t.topic_label.clone()).collect();
        let f = filter_by_topic(&s, &all).unwrap();
        assert_eq!(f, s);
    }

    #[test]
    fn absent_topic_gives_empty_set_with_warning() {
        let s = topical();
        let f = filter_by_topic(&s, &BTreeSet::from(["astrophysics".to_string()])).unwrap();
        assert!(f.projects.is_empty() && f.participations.is_empty());
        assert_eq!(f.anomalies.len(), 1);
        assert!(matches!(filter_by_topic(&s, &BTreeSet::new()), Err(IngestError::EmptyTopicFilter)));
    }
}
