use std::io::{self, Write};

use super::Graph;
use crate::scalar::Weight;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Writes `orgID,orgID,weight` rows (no header) in canonical id order.
pub fn write_edge_list<W: Weight, T: Write>(g: &Graph<W>, out: T) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for (a, b, weight) in g.canonical_edges() {
        w.write_record([a, b, weight.to_string()])?;
    }
    w.flush()
}

/// Writes the graph as GraphML with node attributes (name, country, solo
/// weight, participations, centrality and community when present) and an
/// edge `weight`. Nodes and edges are emitted in canonical id order.
pub fn write_graphml<W: Weight, T: Write>(g: &Graph<W>, mut out: T) -> io::Result<()> {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    let keys = [
        ("name", "node", "string"),
        ("country", "node", "string"),
        ("solo_weight", "node", "double"),
        ("participations", "node", "int"),
        ("degree", "node", "int"),
        ("strength", "node", "double"),
        ("coreness", "node", "int"),
        ("community", "node", "int"),
        ("weight", "edge", "double"),
    ];
    for (name, domain, ty) in keys {
        writeln!(out, r#"  <key id="{name}" for="{domain}" attr.name="{name}" attr.type="{ty}"/>"#)?;
    }
    writeln!(out, r#"  <graph id="G{}" edgedefault="undirected">"#, g.year())?;
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by(|&a, &b| g.node(a).id.cmp(&g.node(b).id));
    for i in order {
        let n = g.node(i);
        writeln!(out, r#"    <node id="{}">"#, escape(&n.id))?;
        writeln!(out, r#"      <data key="name">{}</data>"#, escape(&n.name))?;
        writeln!(out, r#"      <data key="country">{}</data>"#, escape(&n.country))?;
        writeln!(out, r#"      <data key="solo_weight">{}</data>"#, n.solo_weight)?;
        writeln!(out, r#"      <data key="participations">{}</data>"#, n.participations)?;
        if let Some(c) = &n.centrality {
            writeln!(out, r#"      <data key="degree">{}</data>"#, c.degree)?;
            writeln!(out, r#"      <data key="strength">{}</data>"#, c.strength)?;
            writeln!(out, r#"      <data key="coreness">{}</data>"#, c.coreness)?;
        }
        if let Some(c) = n.community {
            writeln!(out, r#"      <data key="community">{c}</data>"#)?;
        }
        writeln!(out, "    </node>")?;
    }
    for (k, (a, b, w)) in g.canonical_edges().into_iter().enumerate() {
        writeln!(
            out,
            r#"    <edge id="e{k}" source="{}" target="{}"><data key="weight">{w}</data></edge>"#,
            escape(&a),
            escape(&b)
        )?;
    }
    writeln!(out, "  </graph>")?;
    writeln!(out, "</graphml>")
}
