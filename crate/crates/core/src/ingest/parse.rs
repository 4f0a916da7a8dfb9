use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use csv::{ReaderBuilder, StringRecord};

use super::{
    IngestError, ParticipationRecord, Programme, ProjectRecord, Reject, RejectReason, Role, RowCounts, TableKind,
    TableSet, TopicRecord,
};

/// Locations of one programme's tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TablePaths {
    pub projects: PathBuf,
    pub participations: PathBuf,
    pub topics: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub delimiter: u8,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { delimiter: b';' }
    }
}

// Accepted header names per field; the first is the canonical name, the rest
// are the spellings used by CORDIS exports.
const PROJ_ID: &[&str] = &["projID", "id", "projectID"];
const ACRONYM: &[&str] = &["acronym"];
const TITLE: &[&str] = &["title"];
const START: &[&str] = &["startDate"];
const END: &[&str] = &["endDate"];
const CALL: &[&str] = &["callID", "masterCall", "call"];
const OBJECTIVE: &[&str] = &["objectiveText", "objective"];

const ORG_ID: &[&str] = &["orgID", "organisationID", "organizationID"];
const PART_PROJ: &[&str] = &["projID", "projectID"];
const ORG_NAME: &[&str] = &["orgName", "name"];
const COUNTRY: &[&str] = &["countryCode", "country"];
const ROLE: &[&str] = &["role"];
const TOTAL_COST: &[&str] = &["totalCost"];
const NET_EC: &[&str] = &["netEcContribution"];

const TOPIC_PROJ: &[&str] = &["projID", "projectID"];
const TOPIC_LABEL: &[&str] = &["topicLabel", "euroSciVocTitle"];

pub(crate) struct Columns {
    index: BTreeMap<&'static str, usize>,
}

impl Columns {
    pub(crate) fn resolve(
        headers: &StringRecord,
        table: TableKind,
        path: &Path,
        required: &[&'static [&'static str]],
        optional: &[&'static [&'static str]],
    ) -> Result<Columns, IngestError> {
        let names: Vec<String> = headers
            .iter()
            .map(|h| h.trim_start_matches('\u{feff}').trim().to_string())
            .collect();
        let find = |aliases: &[&str]| aliases.iter().find_map(|a| names.iter().position(|n| n == a));
        let mut index = BTreeMap::new();
        for aliases in required {
            let pos = find(aliases).ok_or_else(|| IngestError::MissingColumn {
                table,
                path: path.to_path_buf(),
                column: aliases[0],
            })?;
            index.insert(aliases[0], pos);
        }
        for aliases in optional {
            if let Some(pos) = find(aliases) {
                index.insert(aliases[0], pos);
            }
        }
        Ok(Columns { index })
    }

    pub(crate) fn get<'r>(&self, record: &'r StringRecord, aliases: &[&str]) -> &'r str {
        self.index
            .get(aliases[0])
            .and_then(|&i| record.get(i))
            .map(str::trim)
            .unwrap_or("")
    }

    fn max_index(&self) -> usize {
        self.index.values().copied().max().unwrap_or(0)
    }
}

pub(crate) fn open_reader(path: &Path, delimiter: u8) -> Result<csv::Reader<File>, IngestError> {
    if !path.is_file() {
        return Err(IngestError::MissingFile(path.to_path_buf()));
    }
    ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_path(path)
        .map_err(|source| IngestError::Read {
            path: path.to_path_buf(),
            source,
        })
}

fn parse_date(raw: &str) -> Option<NaiveDate> {
    // CORDIS sometimes appends a time component.
    let date = raw.split([' ', 'T']).next().unwrap_or("");
    NaiveDate::parse_from_str(date, "%Y-%m-%d").ok()
}

/// Parses a money amount in EUR; accepts a decimal comma when no dot is present.
fn parse_money(raw: &str) -> Option<Result<f64, ()>> {
    if raw.is_empty() {
        return None;
    }
    let normalized = if raw.contains(',') && !raw.contains('.') {
        raw.replace(',', ".")
    } else {
        raw.replace(',', "")
    };
    Some(match normalized.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(()),
    })
}

struct TableReader<'a> {
    table: TableKind,
    programme: Programme,
    counts: RowCounts,
    rejects: &'a mut Vec<Reject>,
}

impl TableReader<'_> {
    fn reject(&mut self, line: u64, reason: RejectReason, detail: impl Into<String>) {
        self.counts.reject();
        self.rejects.push(Reject {
            table: self.table,
            programme: Some(self.programme),
            line,
            reason,
            detail: detail.into(),
        });
    }
}

/// Parses one programme's project, participation and topic tables.
///
/// Missing files and missing required columns are fatal; malformed rows are
/// collected in [`TableSet::rejects`].
pub fn parse_tables(paths: &TablePaths, programme: Programme, options: ParseOptions) -> Result<TableSet, IngestError> {
    // Check every file up front so a missing table never yields partial output.
    for path in [&paths.projects, &paths.participations, &paths.topics] {
        if !path.is_file() {
            return Err(IngestError::MissingFile(path.clone()));
        }
    }
    let mut set = TableSet {
        programmes: vec![programme],
        ..TableSet::default()
    };
    parse_projects(&paths.projects, programme, options, &mut set)?;
    parse_participations(&paths.participations, programme, options, &mut set)?;
    parse_topics(&paths.topics, programme, options, &mut set)?;
    Ok(set)
}

fn parse_projects(path: &Path, programme: Programme, options: ParseOptions, set: &mut TableSet) -> Result<(), IngestError> {
    let mut reader = open_reader(path, options.delimiter)?;
    let read_err = |source| IngestError::Read {
        path: path.to_path_buf(),
        source,
    };
    let headers = reader.headers().map_err(read_err)?.clone();
    let cols = Columns::resolve(
        &headers,
        TableKind::Projects,
        path,
        &[PROJ_ID, ACRONYM, TITLE, START, END],
        &[CALL, OBJECTIVE],
    )?;
    let mut seen = HashSet::new();
    let mut rows = TableReader {
        table: TableKind::Projects,
        programme,
        counts: RowCounts::default(),
        rejects: &mut set.rejects,
    };
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = match record {
            Ok(r) if r.len() > cols.max_index() => r,
            Ok(_) => {
                rows.reject(line, RejectReason::MalformedRow, "too few fields");
                continue;
            }
            Err(e) => {
                rows.reject(line, RejectReason::MalformedRow, e.to_string());
                continue;
            }
        };
        let proj_id = cols.get(&record, PROJ_ID);
        if proj_id.is_empty() {
            rows.reject(line, RejectReason::MissingKey, "empty projID");
            continue;
        }
        let (Some(start_date), Some(end_date)) = (parse_date(cols.get(&record, START)), parse_date(cols.get(&record, END)))
        else {
            rows.reject(line, RejectReason::UnparsableDate, format!("project {proj_id}"));
            continue;
        };
        if end_date < start_date {
            rows.reject(line, RejectReason::DateOrder, format!("project {proj_id}: {start_date} > {end_date}"));
            continue;
        }
        if !seen.insert(proj_id.to_string()) {
            rows.reject(line, RejectReason::DuplicateKey, format!("project {proj_id}"));
            continue;
        }
        rows.counts.accept();
        set.projects.push(ProjectRecord {
            proj_id: proj_id.to_string(),
            acronym: cols.get(&record, ACRONYM).to_string(),
            title: cols.get(&record, TITLE).to_string(),
            start_date,
            end_date,
            call_id: cols.get(&record, CALL).to_string(),
            objective: cols.get(&record, OBJECTIVE).to_string(),
            programme,
        });
    }
    let counts = rows.counts;
    set.counts.entry(TableKind::Projects).or_default().add(counts);
    Ok(())
}

fn parse_participations(
    path: &Path,
    programme: Programme,
    options: ParseOptions,
    set: &mut TableSet,
) -> Result<(), IngestError> {
    let mut reader = open_reader(path, options.delimiter)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Read {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let cols = Columns::resolve(
        &headers,
        TableKind::Participations,
        path,
        &[ORG_ID, PART_PROJ, TOTAL_COST, NET_EC],
        &[ORG_NAME, COUNTRY, ROLE],
    )?;
    let mut seen = HashSet::new();
    let mut notes = Vec::new();
    let mut rows = TableReader {
        table: TableKind::Participations,
        programme,
        counts: RowCounts::default(),
        rejects: &mut set.rejects,
    };
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = match record {
            Ok(r) if r.len() > cols.max_index() => r,
            Ok(_) => {
                rows.reject(line, RejectReason::MalformedRow, "too few fields");
                continue;
            }
            Err(e) => {
                rows.reject(line, RejectReason::MalformedRow, e.to_string());
                continue;
            }
        };
        let org_id = cols.get(&record, ORG_ID);
        let proj_id = cols.get(&record, PART_PROJ);
        if org_id.is_empty() || proj_id.is_empty() {
            rows.reject(line, RejectReason::MissingKey, "empty orgID or projID");
            continue;
        }
        let total = parse_money(cols.get(&record, TOTAL_COST));
        let net = parse_money(cols.get(&record, NET_EC));
        let (total_cost, net_ec_contribution) = match (total, net) {
            (None, None) => {
                rows.reject(line, RejectReason::MissingValue, format!("{org_id}/{proj_id}: no monetary values"));
                continue;
            }
            (Some(Err(())), _) | (_, Some(Err(()))) => {
                rows.reject(line, RejectReason::InvalidValue, format!("{org_id}/{proj_id}: unparsable amount"));
                continue;
            }
            (t, n) => {
                if t.is_none() || n.is_none() {
                    notes.push(format!("line {line}: {org_id}/{proj_id} has one monetary value missing; using 0"));
                }
                (t.map_or(0.0, |v| v.unwrap_or(0.0)), n.map_or(0.0, |v| v.unwrap_or(0.0)))
            }
        };
        if !seen.insert((org_id.to_string(), proj_id.to_string())) {
            rows.reject(line, RejectReason::DuplicateKey, format!("{org_id}/{proj_id}"));
            continue;
        }
        if net_ec_contribution > total_cost {
            notes.push(format!(
                "line {line}: {org_id}/{proj_id} netEcContribution {net_ec_contribution} exceeds totalCost {total_cost}"
            ));
        }
        let raw_role = cols.get(&record, ROLE);
        let role = Role::parse(raw_role).unwrap_or_else(|| {
            if !raw_role.is_empty() {
                notes.push(format!("line {line}: unrecognised role `{raw_role}` recorded as participant"));
            }
            Role::Participant
        });
        rows.counts.accept();
        set.participations.push(ParticipationRecord {
            org_id: org_id.to_string(),
            proj_id: proj_id.to_string(),
            org_name: cols.get(&record, ORG_NAME).to_string(),
            country_code: cols.get(&record, COUNTRY).to_string(),
            role,
            total_cost,
            net_ec_contribution,
        });
    }
    let counts = rows.counts;
    set.counts.entry(TableKind::Participations).or_default().add(counts);
    for note in notes {
        set.note(format!("{programme} participations {note}"));
    }
    Ok(())
}

fn parse_topics(path: &Path, programme: Programme, options: ParseOptions, set: &mut TableSet) -> Result<(), IngestError> {
    let mut reader = open_reader(path, options.delimiter)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Read {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let cols = Columns::resolve(&headers, TableKind::Topics, path, &[TOPIC_PROJ, TOPIC_LABEL], &[])?;
    let mut seen = HashSet::new();
    let mut rows = TableReader {
        table: TableKind::Topics,
        programme,
        counts: RowCounts::default(),
        rejects: &mut set.rejects,
    };
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = match record {
            Ok(r) if r.len() > cols.max_index() => r,
            Ok(_) => {
                rows.reject(line, RejectReason::MalformedRow, "too few fields");
                continue;
            }
            Err(e) => {
                rows.reject(line, RejectReason::MalformedRow, e.to_string());
                continue;
            }
        };
        let proj_id = cols.get(&record, TOPIC_PROJ);
        let topic_label = cols.get(&record, TOPIC_LABEL);
        if proj_id.is_empty() || topic_label.is_empty() {
            rows.reject(line, RejectReason::MissingKey, "empty projID or topic");
            continue;
        }
        if !seen.insert((proj_id.to_string(), topic_label.to_string())) {
            rows.reject(line, RejectReason::DuplicateKey, format!("{proj_id}/{topic_label}"));
            continue;
        }
        rows.counts.accept();
        set.topics.push(TopicRecord {
            proj_id: proj_id.to_string(),
            topic_label: topic_label.to_string(),
        });
    }
    let counts = rows.counts;
    set.counts.entry(TableKind::Topics).or_default().add(counts);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::TempDir;

    fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    fn fixture(projects: &str, orgs: &str, topics: &str) -> (TempDir, TablePaths) {
        let dir = TempDir::new().unwrap();
        let paths = TablePaths {
            projects: write(&dir, "project.csv", projects),
            participations: write(&dir, "organization.csv", orgs),
            topics: write(&dir, "euroSciVoc.csv", topics),
        };
        (dir, paths)
    }

    const ORGS: &str = "orgID;projID;orgName;countryCode;role;totalCost;netEcContribution\n";
    const TOPICS: &str = "projID;topicLabel\n";

    #[test]
    fn clean_projects_parse() {
        let (_d, paths) = fixture(
            "projID;acronym;title;startDate;endDate\n\
             1;A;Alpha;2020-01-01;2020-12-31\n\
             2;B;\"Beta; the sequel\";2019-03-01;2022-02-28\n\
             3;C;Gamma;2021-06-01;2021-06-01\n",
            ORGS,
            TOPICS,
        );
        let set = parse_tables(&paths, Programme::H2020, ParseOptions::default()).unwrap();
        assert_eq!(set.projects.len(), 3);
        assert!(set.rejects.is_empty());
        assert_eq!(set.projects[1].title, "Beta; the sequel");
        let c = set.counts[&TableKind::Projects];
        assert_eq!((c.rows_in, c.accepted, c.rejected), (3, 3, 0));
    }

    #[test]
    fn end_before_start_is_rejected() {
        let (_d, paths) = fixture(
            "projID;acronym;title;startDate;endDate\n1;A;Alpha;2020-05-01;2020-04-30\n",
            ORGS,
            TOPICS,
        );
        let set = parse_tables(&paths, Programme::H2020, ParseOptions::default()).unwrap();
        assert!(set.projects.is_empty());
        assert_eq!(set.rejects.len(), 1);
        assert_eq!(set.rejects[0].reason.to_string(), "date order");
    }

    #[test]
    fn empty_org_id_is_missing_key() {
        let (_d, paths) = fixture(
            "projID;acronym;title;startDate;endDate\n",
            "orgID;projID;orgName;countryCode;role;totalCost;netEcContribution\n;1;X;IT;participant;10;10\n7;1;Y;IT;coordinator;1000;900\n",
            TOPICS,
        );
        let set = parse_tables(&paths, Programme::H2020, ParseOptions::default()).unwrap();
        assert_eq!(set.participations.len(), 1);
        assert_eq!(set.rejects.len(), 1);
        assert_eq!(set.rejects[0].reason.to_string(), "missing key");
        assert_eq!(set.rejects[0].line, 2);
    }

    #[test]
    fn cordis_column_names_and_decimal_comma() {
        let (_d, paths) = fixture(
            "id;acronym;title;startDate;endDate;masterCall\n9;X;Y;2020-01-01 00:00:00;2020-12-31;CALL-1\n",
            "projectID;organisationID;name;country;role;totalCost;netEcContribution\n9;55;Org;DE;thirdParty;1234,5;1000\n",
            "projectID;euroSciVocTitle;euroSciVocCode\n9;hydrogen energy;/x/y\n",
        );
        let set = parse_tables(&paths, Programme::HorizonEurope, ParseOptions::default()).unwrap();
        assert_eq!(set.projects[0].call_id, "CALL-1");
        assert_eq!(set.participations[0].total_cost, 1234.5);
        assert_eq!(set.participations[0].role, Role::Participant);
        assert_eq!(set.topics[0].topic_label, "hydrogen energy");
        assert_eq!(set.anomalies.len(), 1);
    }

    #[test]
    fn missing_file_and_column_are_fatal() {
        let (d, mut paths) = fixture("projID;acronym;title;startDate\n", ORGS, TOPICS);
        let err = parse_tables(&paths, Programme::H2020, ParseOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn { column: "endDate", .. }), "{err}");
        paths.topics = d.path().join("nope.csv");
        let err = parse_tables(&paths, Programme::H2020, ParseOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MissingFile(_)));
    }

    #[test]
    fn missing_money_and_bad_dates() {
        let (_d, paths) = fixture(
            "projID;acronym;title;startDate;endDate\n1;A;B;2020-13-01;2021-01-01\n",
            "orgID;projID;totalCost;netEcContribution\n1;1;;\n2;1;abc;5\n3;1;10;\n",
            TOPICS,
        );
        let set = parse_tables(&paths, Programme::H2020, ParseOptions::default()).unwrap();
        let reasons: Vec<_> = set.rejects.iter().map(|r| r.reason).collect();
        assert_eq!(
            reasons,
            vec![RejectReason::UnparsableDate, RejectReason::MissingValue, RejectReason::InvalidValue]
        );
        assert_eq!(set.participations.len(), 1);
        assert_eq!(set.participations[0].net_ec_contribution, 0.0);
        let c = set.counts[&TableKind::Participations];
        assert_eq!(c.rows_in, c.accepted + c.rejected);
    }
}
