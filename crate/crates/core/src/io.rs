//! Model, structure, sample and result file formats.
//!
//! Models and structures are JSON, samples and grids are CSV. Model files are
//! written in a canonical form (sorted ids, every float with 17 significant
//! digits) so that writing a parsed file reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::divergence::{DivergenceResult, NamedDivergence, Scope};
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::graph::UndirectedGraph;
use crate::model::{DecomposableModel, SampleDataset, Variable, VariableTable};
use crate::VarId;

pub const FORMAT_VERSION: u32 = 1;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableEntry {
    id: VarId,
    cardinality: Option<usize>,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    variables: Vec<VarId>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    variables: Vec<VariableEntry>,
    cliques: Vec<Vec<VarId>>,
    tables: Vec<TableEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureFile {
    format_version: u32,
    variables: Vec<VariableEntry>,
    edges: Vec<(VarId, VarId)>,
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::InvalidModel(format!("unsupported format_version {v}")));
    }
    Ok(())
}

fn variable_table(entries: Vec<VariableEntry>, default_card: Option<usize>) -> Result<VariableTable> {
    let mut entries = entries;
    entries.sort_by_key(|e| e.id);
    if entries.iter().enumerate().any(|(i, e)| e.id != i) {
        return Err(Error::InvalidModel("variable ids must be 0..n-1 without gaps".into()));
    }
    let vars = entries
        .into_iter()
        .map(|e| {
            let cardinality = e
                .cardinality
                .or(default_card)
                .ok_or_else(|| Error::InvalidModel(format!("variable {} has no cardinality", e.id)))?;
            Ok(Variable {
                cardinality,
                name: e.name,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    VariableTable::new(vars)
}

pub fn parse_model(text: &str) -> Result<DecomposableModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("model file: {e}")))?;
    check_version(file.format_version)?;
    let vars = variable_table(file.variables, None)?;
    if file.cliques.len() != file.tables.len() {
        return Err(Error::InvalidModel(format!(
            "{} cliques but {} tables",
            file.cliques.len(),
            file.tables.len()
        )));
    }
    let mut cpts = Vec::with_capacity(file.tables.len());
    for (clique, t) in file.cliques.iter().zip(file.tables) {
        let mut a = clique.clone();
        let mut b = t.variables.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::InvalidModel(format!(
                "table over {:?} listed for clique {clique:?}",
                t.variables
            )));
        }
        if let Some(&v) = t.variables.iter().find(|&&v| v >= vars.len()) {
            return Err(Error::InvalidModel(format!("unknown variable {v}")));
        }
        let cards = t.variables.iter().map(|&v| vars.cardinality(v)).collect();
        cpts.push(Factor::new(t.variables, cards, t.values)?);
    }
    DecomposableModel::new(vars, cpts)
}

pub fn read_model(path: &Path) -> Result<DecomposableModel> {
    parse_model(&read(path)?)
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialise")
}

fn variables_json(vars: &VariableTable, out: &mut String) {
    out.push_str("  \"variables\": [\n");
    for (i, v) in vars.variables().iter().enumerate() {
        let name = v.name.as_deref().map(json_str).unwrap_or_else(|| "null".into());
        let sep = if i + 1 < vars.len() { "," } else { "" };
        let _ = writeln!(
            out,
            "    {{\"id\": {i}, \"cardinality\": {}, \"name\": {name}}}{sep}",
            v.cardinality
        );
    }
    out.push_str("  ],\n");
}

fn id_list(ids: &[VarId]) -> String {
    let parts: Vec<String> = ids.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Canonical JSON text of a model.
pub fn model_to_json(model: &DecomposableModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{\n  \"format_version\": {FORMAT_VERSION},");
    variables_json(model.variables(), &mut out);
    let cliques: Vec<String> = model.cliques().iter().map(|c| id_list(c)).collect();
    let _ = writeln!(out, "  \"cliques\": [{}],", cliques.join(", "));
    out.push_str("  \"tables\": [\n");
    for (i, t) in model.cpts().iter().enumerate() {
        let values: Vec<String> = t.values().iter().map(|&x| float(x)).collect();
        let sep = if i + 1 < model.cpts().len() { "," } else { "" };
        let _ = writeln!(
            out,
            "    {{\"variables\": {}, \"values\": [{}]}}{sep}",
            id_list(t.scope()),
            values.join(", ")
        );
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn write_model(path: &Path, model: &DecomposableModel) -> Result<()> {
    write_file(path, &model_to_json(model))
}

/// A graph over the listed variables, which carry names and, optionally,
/// cardinalities.
#[derive(Clone, Debug, PartialEq)]
pub struct Structure {
    pub names: Vec<Option<String>>,
    pub cardinalities: Vec<Option<usize>>,
    pub graph: UndirectedGraph,
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    let file: StructureFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("structure file: {e}")))?;
    check_version(file.format_version)?;
    let mut entries = file.variables;
    entries.sort_by_key(|e| e.id);
    if entries.iter().enumerate().any(|(i, e)| e.id != i) {
        return Err(Error::InvalidModel("variable ids must be 0..n-1 without gaps".into()));
    }
    let n = entries.len();
    let mut graph = UndirectedGraph::with_vertices(0..n);
    for (u, v) in file.edges {
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidModel(format!("bad edge ({u}, {v})")));
        }
        graph.add_edge(u, v);
    }
    Ok(Structure {
        names: entries.iter().map(|e| e.name.clone()).collect(),
        cardinalities: entries.iter().map(|e| e.cardinality).collect(),
        graph,
    })
}

pub fn read_structure(path: &Path) -> Result<Structure> {
    parse_structure(&read(path)?)
}

pub fn structure_to_json(vars: &VariableTable, graph: &UndirectedGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{\n  \"format_version\": {FORMAT_VERSION},");
    variables_json(vars, &mut out);
    let edges: Vec<String> = graph.edges().iter().map(|(u, v)| format!("[{u}, {v}]")).collect();
    let _ = writeln!(out, "  \"edges\": [{}]\n}}", edges.join(", "));
    out
}

/// Header names and rows of a sample CSV. Lines starting with `#` are skipped.
pub fn parse_samples_raw(text: &str) -> Result<(Vec<String>, Vec<Vec<usize>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::InvalidData(format!("sample header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().any(|h| h.is_empty()) {
        return Err(Error::InvalidData("sample header has an empty column name".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidData(format!("sample row {}: {e}", i + 1)))?;
        if rec.len() != header.len() {
            return Err(Error::InvalidData(format!(
                "sample row {} has {} fields, expected {}",
                i + 1,
                rec.len(),
                header.len()
            )));
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<usize>()
                    .map_err(|_| Error::InvalidData(format!("sample row {}: '{f}' is not a nonnegative integer", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Cardinalities inferred from the data: largest value plus one, at least 2.
pub fn infer_cardinalities<'a>(width: usize, rows: impl IntoIterator<Item = &'a Vec<usize>>) -> Vec<usize> {
    let mut cards = vec![2; width];
    for row in rows {
        for (c, &x) in cards.iter_mut().zip(row) {
            *c = (*c).max(x + 1);
        }
    }
    cards
}

pub fn dataset(names: &[String], cards: &[usize], rows: Vec<Vec<usize>>) -> Result<SampleDataset> {
    let vars = VariableTable::new(
        names
            .iter()
            .zip(cards)
            .map(|(n, &c)| Variable {
                cardinality: c,
                name: Some(n.clone()),
            })
            .collect(),
    )?;
    SampleDataset::new(vars, rows)
}

pub fn read_samples_raw(path: &Path) -> Result<(Vec<String>, Vec<Vec<usize>>)> {
    parse_samples_raw(&read(path)?)
}

pub fn samples_to_csv(data: &SampleDataset) -> String {
    let vars = data.variables();
    let mut out = (0..vars.len()).map(|v| vars.name(v)).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in data.rows() {
        let fields: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Shortest text that reads back as the same float.
pub fn number(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

fn names(vars: &VariableTable, ids: &[VarId]) -> Vec<String> {
    ids.iter().map(|&v| vars.name(v)).collect()
}

pub fn grid_to_csv(vars: &VariableTable, grid: &[(Vec<VarId>, f64)]) -> String {
    let mut out = String::from("tuple,value\n");
    for (t, v) in grid {
        let _ = writeln!(out, "{},{}", names(vars, t).join(";"), number(*v));
    }
    out
}

pub fn grid_to_json(vars: &VariableTable, grid: &[(Vec<VarId>, f64)]) -> String {
    let rows: Vec<Value> = grid
        .iter()
        .map(|(t, v)| json!({"tuple": names(vars, t), "value": v}))
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("grid serialises");
    s.push('\n');
    s
}

/// `(tuple, value)` rows of a grid CSV.
pub fn parse_grid_csv(text: &str) -> Result<Vec<(Vec<String>, f64)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::InvalidData(format!("grid: {e}")))?;
        let value = rec[1]
            .parse::<f64>()
            .map_err(|e| Error::InvalidData(format!("grid value '{}': {e}", &rec[1])))?;
        out.push((rec[0].split(';').map(str::to_string).collect(), value));
    }
    Ok(out)
}

fn scope_json(vars: &VariableTable, scope: &Scope) -> Value {
    match scope {
        Scope::Joint => json!({"kind": "joint"}),
        Scope::Marginal(z) => json!({"kind": "marginal", "variables": names(vars, z)}),
        Scope::Conditional { target, given } => json!({
            "kind": "conditional",
            "target": names(vars, target),
            "given": names(vars, given),
        }),
    }
}

fn scope_text(vars: &VariableTable, scope: &Scope) -> String {
    match scope {
        Scope::Joint => "joint".into(),
        Scope::Marginal(z) => format!("marginal({})", names(vars, z).join(";")),
        Scope::Conditional { target, given } => {
            format!("conditional({}|{})", names(vars, target).join(";"), names(vars, given).join(";"))
        }
    }
}

/// JSON object describing a divergence result. Wall time is included only
/// when `timing` is set, so that output is otherwise reproducible.
pub fn result_to_json(vars: &VariableTable, r: &DivergenceResult, preset: Option<NamedDivergence>, timing: bool) -> String {
    let mut diag = json!({
        "treewidths": r.diagnostics.treewidths,
        "max_table_cells": r.diagnostics.max_table_cells,
        "calibrations": r.diagnostics.calibrations,
    });
    if timing {
        diag["millis"] = json!(r.diagnostics.millis);
    }
    let v = json!({
        "value": r.value,
        "alpha": r.params.alpha(),
        "beta": r.params.beta(),
        "branch": r.params.branch().to_string(),
        "preset": preset.map(|p| p.name()),
        "scope": scope_json(vars, &r.scope),
        "diagnostics": diag,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("result serialises");
    s.push('\n');
    s
}

pub fn result_to_csv(vars: &VariableTable, r: &DivergenceResult, preset: Option<NamedDivergence>) -> String {
    format!(
        "value,alpha,beta,branch,preset,scope\n{},{},{},{},{},{}\n",
        number(r.value),
        number(r.params.alpha()),
        number(r.params.beta()),
        r.params.branch(),
        preset.map(|p| p.name()).unwrap_or(""),
        scope_text(vars, &r.scope)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn model_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let vars = VariableTable::with_cardinalities(&[2, 3, 2, 2, 4, 2]).unwrap();
            let g = synth::random_chordal_graph(&mut rng, 6, 2);
            let m = synth::random_model(&mut rng, &vars, &g).unwrap();
            let text = model_to_json(&m);
            let back = parse_model(&text).unwrap();
            assert_eq!(back, m);
            for (a, b) in back.cpts().iter().zip(m.cpts()) {
                let bits = |f: &Factor| f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(a), bits(b));
            }
            assert_eq!(model_to_json(&back), text);
        }
    }

    #[test]
    fn model_tables_in_any_variable_order() {
        let text = r#"{"format_version": 1,
            "variables": [{"id": 1, "cardinality": 2, "name": "b"}, {"id": 0, "cardinality": 2}],
            "cliques": [[1, 0]],
            "tables": [{"variables": [1, 0], "values": [0.1, 0.2, 0.3, 0.4]}]}"#;
        let m = parse_model(text).unwrap();
        // b=0,a=1 is the second listed entry
        assert_eq!(m.joint_probability(&[1, 0]), 0.2);
        assert_eq!(m.variables().name(1), "b");
        assert_eq!(m.variables().name(0), "x0");
    }

    #[test]
    fn model_errors() {
        let bad_sum = r#"{"format_version": 1, "variables": [{"id": 0, "cardinality": 2}],
            "cliques": [[0]], "tables": [{"variables": [0], "values": [0.5, 0.6]}]}"#;
        assert!(matches!(parse_model(bad_sum), Err(Error::InvalidModel(_))));
        assert!(matches!(parse_model("{"), Err(Error::InvalidModel(_))));
        let cycle = r#"{"format_version": 1,
            "variables": [{"id": 0, "cardinality": 2}, {"id": 1, "cardinality": 2},
                          {"id": 2, "cardinality": 2}, {"id": 3, "cardinality": 2}],
            "cliques": [[0, 1], [1, 2], [2, 3], [0, 3]],
            "tables": [{"variables": [0, 1], "values": [0.25, 0.25, 0.25, 0.25]},
                       {"variables": [1, 2], "values": [0.5, 0.5, 0.5, 0.5]},
                       {"variables": [2, 3], "values": [0.5, 0.5, 0.5, 0.5]},
                       {"variables": [0, 3], "values": [1, 1, 1, 1]}]}"#;
        assert_eq!(parse_model(cycle), Err(Error::NotChordal));
    }

    #[test]
    fn samples_with_comments() {
        let (h, rows) = parse_samples_raw("# generated\na,b\n0,1\n# mid\n2,0\n").unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(rows, vec![vec![0, 1], vec![2, 0]]);
        assert_eq!(infer_cardinalities(2, &rows), vec![3, 2]);
        assert!(matches!(parse_samples_raw("a,b\n0,x\n"), Err(Error::InvalidData(_))));
        assert!(matches!(parse_samples_raw("a,b\n0\n"), Err(Error::InvalidData(_))));
        let d = dataset(&h, &[3, 2], rows).unwrap();
        assert_eq!(samples_to_csv(&d), "a,b\n0,1\n2,0\n");
    }

    #[test]
    fn structure_parsing() {
        let s = parse_structure(
            r#"{"format_version": 1, "variables": [{"id": 0, "name": "a"}, {"id": 1, "name": "b"}], "edges": [[0, 1]]}"#,
        )
        .unwrap();
        assert_eq!(s.graph.edges(), vec![(0, 1)]);
        assert_eq!(s.names, vec![Some("a".into()), Some("b".into())]);
        assert!(parse_structure(r#"{"format_version": 1, "variables": [{"id": 0}], "edges": [[0, 0]]}"#).is_err());
        let vars = VariableTable::binary(2);
        let text = structure_to_json(&vars, &s.graph);
        assert_eq!(parse_structure(&text).unwrap().graph, s.graph);
    }

    #[test]
    fn grid_csv_round_trip() {
        let vars = VariableTable::binary(3);
        let grid = vec![(vec![0, 1], 0.125), (vec![0, 2], 1e-20), (vec![1, 2], 0.0)];
        let text = grid_to_csv(&vars, &grid);
        assert_eq!(text, "tuple,value\nx0;x1,0.125\nx0;x2,1e-20\nx1;x2,0.0\n");
        let back = parse_grid_csv(&text).unwrap();
        assert_eq!(back[1].0, vec!["x0", "x2"]);
        assert_eq!(back[1].1, 1e-20);
    }
}
