//! Fixture tables, configs and a wrapper around the built binary.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// One project: id, start, end, topic and `(orgID, netEcContribution EUR)`.
pub struct Project {
    pub id: String,
    pub start: String,
    pub end: String,
    pub topic: &'static str,
    pub members: Vec<(String, f64)>,
}

pub fn project(id: &str, year: i32, topic: &'static str, members: &[(&str, f64)]) -> Project {
    Project {
        id: id.into(),
        start: format!("{year}-02-01"),
        end: format!("{year}-11-30"),
        topic,
        members: members.iter().map(|(o, v)| (o.to_string(), *v)).collect(),
    }
}

/// Every pair of `orgs` as a two-member project of `value` EUR per member.
pub fn pairwise(prefix: &str, year: i32, orgs: &[&str], value: f64) -> Vec<Project> {
    let mut out = Vec::new();
    for i in 0..orgs.len() {
        for j in i + 1..orgs.len() {
            out.push(project(&format!("{prefix}{year}-{i}-{j}"), year, "hydrogen energy", &[(orgs[i], value), (orgs[j], value)]));
        }
    }
    out
}

/// Writes `project.csv`, `organization.csv` and `euroSciVoc.csv` into `dir`.
pub fn write_tables(dir: &Path, projects: &[Project]) {
    fs::create_dir_all(dir).unwrap();
    let mut proj = String::from("id;acronym;title;startDate;endDate;masterCall;objective\n");
    let mut part = String::from("projectID;organisationID;name;country;role;totalCost;netEcContribution\n");
    let mut topics = String::from("projectID;euroSciVocTitle\n");
    for p in projects {
        writeln!(proj, "{};{};\"Title; {}\";{};{};CALL;Text", p.id, p.id, p.id, p.start, p.end).unwrap();
        for (i, (org, v)) in p.members.iter().enumerate() {
            let role = if i == 0 { "coordinator" } else { "participant" };
            writeln!(part, "{};{org};Org {org};DE;{role};{};{v}", p.id, v * 2.0).unwrap();
        }
        writeln!(topics, "{};{}", p.id, p.topic).unwrap();
    }
    fs::write(dir.join("project.csv"), proj).unwrap();
    fs::write(dir.join("organization.csv"), part).unwrap();
    fs::write(dir.join("euroSciVoc.csv"), topics).unwrap();
}

pub fn clique(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Two years of two dense groups joined by a light bridge, plus one
/// off-topic project the filter must drop.
pub fn two_year_projects() -> Vec<Project> {
    let a = clique("a", 5);
    let b = clique("b", 5);
    let mut out = Vec::new();
    for year in [2020, 2021] {
        out.extend(pairwise("A", year, &refs(&a), 20_000.0));
        out.extend(pairwise("B", year, &refs(&b), 20_000.0));
        out.push(project(&format!("X{year}"), year, "hydrogen energy", &[("a0", 1_000.0), ("b0", 1_000.0)]));
    }
    out.push(project("W2020", 2020, "wind energy", &[("a1", 50_000.0), ("w0", 50_000.0)]));
    out
}

fn members(ids: &[String], v: f64) -> Vec<(&str, f64)> {
    ids.iter().map(|o| (o.as_str(), v)).collect()
}

/// 2020: one group of ten; 2021: the same organisations as groups of six and four.
pub fn split_projects() -> Vec<Project> {
    let all = clique("o", 10);
    vec![
        project("P2020", 2020, "hydrogen energy", &members(&all, 10_000.0)),
        project("P2021a", 2021, "hydrogen energy", &members(&all[..6], 10_000.0)),
        project("P2021b", 2021, "hydrogen energy", &members(&all[6..], 10_000.0)),
        project("P2021x", 2021, "hydrogen energy", &[("o0", 100.0), ("o6", 100.0)]),
    ]
}

/// Eight triangles in a ring; bridges are slightly heavier than the triangle
/// edges so that several partitions share the best modularity.
pub fn triangle_ring_projects(year: i32) -> Vec<Project> {
    let mut out = Vec::new();
    for t in 0..8 {
        let v: Vec<String> = (0..3).map(|i| format!("t{t}v{i}")).collect();
        out.extend(pairwise(&format!("T{t}-"), year, &refs(&v), 500.0));
        let next = format!("t{}v0", (t + 1) % 8);
        out.push(project(&format!("R{t}"), year, "hydrogen energy", &[(&v[2], 600.0), (&next, 600.0)]));
    }
    out
}

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    /// Tables under `h2020/` and a config with `extra` TOML appended.
    pub fn new(projects: &[Project], extra: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_tables(&dir.path().join("h2020"), projects);
        let ws = Workspace { dir };
        ws.write_config(extra);
        ws
    }

    pub fn write_config(&self, extra: &str) {
        let text = format!(
            r#"seed = 11
out = "out"

[[input.programmes]]
programme = "H2020"
dir = "h2020"

{extra}
"#
        );
        fs::write(self.config(), text).unwrap();
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn config(&self) -> PathBuf {
        self.path().join("collabnet.toml")
    }

    pub fn out(&self) -> PathBuf {
        self.path().join("out")
    }

    pub fn run(&self, args: &[&str]) -> Output {
        let out = Command::new(env!("CARGO_BIN_EXE_collabnet"))
            .arg("--config")
            .arg(self.config())
            .args(args)
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        out
    }

    /// Runs and asserts the exit code, printing stderr on mismatch.
    pub fn expect(&self, args: &[&str], code: i32) -> String {
        let o = self.run(args);
        let stderr = String::from_utf8_lossy(&o.stderr).into_owned();
        assert_eq!(o.status.code(), Some(code), "collabnet {args:?}\n{stderr}");
        stderr
    }

    pub fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.out().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }

    pub fn csv(&self, rel: &str) -> Vec<BTreeMap<String, String>> {
        let mut r = csv::Reader::from_path(self.out().join(rel)).unwrap();
        let headers = r.headers().unwrap().clone();
        r.records()
            .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
            .collect()
    }
}

/// Every file under `root` with its bytes, keyed by relative path.
pub fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}
