//! JSON file formats for assemblages, correlations, frames, realizations and
//! moment-matrix certificates.
//!
//! Complex scalars serialize as `[re, im]` pairs, matrices row-major. Map
//! keys are the joined label strings ("a1,...,aN|x1,...,xN"), kept in
//! BTreeMaps so identical objects always serialize byte-identically.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::moment::{MomentKind, MomentMatrix};
use crate::quantum::{Assemblage, Correlation, MeasurementSet};
use crate::tomography::TomographyFrame;
use crate::words::{PartyDims, PartyLayout, Scenario, Word};
use crate::ghjw::Realization;

type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.rows)
        .map(|i| (0..m.cols).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_from_json(v: &JsonMatrix, context: &str) -> Result<CMatrix> {
    let rows = v.len();
    if rows == 0 {
        return Err(Error::format(format!("{context}: empty matrix")));
    }
    let cols = v[0].len();
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in v.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::format(format!("{context}: ragged matrix rows")));
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = c64::new(z[0], z[1]);
        }
    }
    Ok(m)
}

fn join_labels(outputs: &[usize], inputs: &[usize]) -> String {
    format!(
        "{}|{}",
        outputs
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
        inputs
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )
}

fn split_labels(key: &str, arity: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let (o, i) = key
        .split_once('|')
        .ok_or_else(|| Error::format(format!("key '{key}': missing '|'")))?;
    let parse = |s: &str| -> Result<Vec<usize>> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::format(format!("key '{key}': bad label '{t}'")))
            })
            .collect()
    };
    let outputs = parse(o)?;
    let inputs = parse(i)?;
    if outputs.len() != arity || inputs.len() != arity {
        return Err(Error::format(format!(
            "key '{key}': expected {arity} comma-separated labels per side"
        )));
    }
    Ok((outputs, inputs))
}

#[derive(Serialize, Deserialize)]
struct AssemblageFile {
    scenario: Scenario,
    elements: BTreeMap<String, JsonMatrix>,
}

pub fn assemblage_to_json(asm: &Assemblage) -> String {
    let mut elements = BTreeMap::new();
    for a in asm.output_tuples() {
        for x in asm.input_tuples() {
            elements.insert(join_labels(&a, &x), matrix_to_json(asm.element(&a, &x)));
        }
    }
    serde_json::to_string_pretty(&AssemblageFile {
        scenario: asm.scenario,
        elements,
    })
    .expect("serialize assemblage")
}

pub fn assemblage_from_json(text: &str) -> Result<Assemblage> {
    let file: AssemblageFile =
        serde_json::from_str(text).map_err(|e| Error::format(format!("assemblage: {e}")))?;
    let s = file.scenario;
    s.validate()?;
    let mut missing = Vec::new();
    let asm = Assemblage::from_fn(s, |a, x| {
        let key = join_labels(a, x);
        match file
            .elements
            .get(&key)
            .and_then(|m| matrix_from_json(m, &key).ok())
        {
            Some(m) => m,
            None => {
                missing.push(key);
                CMatrix::zeros(s.bob_dim, s.bob_dim)
            }
        }
    })?;
    if !missing.is_empty() {
        return Err(Error::format(format!(
            "assemblage: missing or malformed elements: {}",
            missing.join(", ")
        )));
    }
    Ok(asm)
}

#[derive(Serialize, Deserialize)]
struct CorrelationFile {
    shape: Vec<[usize; 2]>,
    p: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame: Option<String>,
}

pub fn correlation_to_json(corr: &Correlation) -> String {
    let out_r: Vec<usize> = corr.layout.0.iter().map(|d| d.n_outputs).collect();
    let in_r: Vec<usize> = corr.layout.0.iter().map(|d| d.n_inputs).collect();
    let mut p = BTreeMap::new();
    for a in crate::quantum::all_tuples(&out_r) {
        for x in crate::quantum::all_tuples(&in_r) {
            p.insert(join_labels(&a, &x), corr.prob(&a, &x));
        }
    }
    serde_json::to_string_pretty(&CorrelationFile {
        shape: corr.layout.0.iter().map(|d| [d.n_outputs, d.n_inputs]).collect(),
        p,
        frame: corr.tomographic_frame.clone(),
    })
    .expect("serialize correlation")
}

pub fn correlation_from_json(text: &str) -> Result<Correlation> {
    let file: CorrelationFile =
        serde_json::from_str(text).map_err(|e| Error::format(format!("correlation: {e}")))?;
    let layout = PartyLayout(
        file.shape
            .iter()
            .map(|&[o, i]| PartyDims {
                n_outputs: o,
                n_inputs: i,
            })
            .collect(),
    );
    let arity = layout.n_parties();
    let mut table: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
    for (k, &v) in &file.p {
        let (o, i) = split_labels(k, arity)?;
        table.insert((o, i), v);
    }
    let mut missing = Vec::new();
    let corr = Correlation::from_fn(layout, |a, x| {
        match table.get(&(a.to_vec(), x.to_vec())) {
            Some(&v) => v,
            None => {
                missing.push(join_labels(a, x));
                0.0
            }
        }
    })?;
    if !missing.is_empty() {
        return Err(Error::format(format!(
            "correlation: missing entries: {}",
            missing.join(", ")
        )));
    }
    let mut corr = corr;
    corr.tomographic_frame = file.frame;
    Ok(corr)
}

#[derive(Serialize, Deserialize)]
struct FrameFile {
    dim: usize,
    name: String,
    n_outputs: usize,
    n_inputs: usize,
    measurements: BTreeMap<String, JsonMatrix>,
    dual: BTreeMap<String, JsonMatrix>,
}

pub fn frame_to_json(frame: &TomographyFrame) -> String {
    let m = &frame.measurements;
    let mut measurements = BTreeMap::new();
    let mut dual = BTreeMap::new();
    for y in 0..m.n_inputs {
        for b in 0..m.n_outputs {
            let key = format!("{b}|{y}");
            measurements.insert(key.clone(), matrix_to_json(m.op(b, y)));
            dual.insert(key, matrix_to_json(frame.dual(b, y)));
        }
    }
    serde_json::to_string_pretty(&FrameFile {
        dim: frame.dim,
        name: frame.name.clone(),
        n_outputs: m.n_outputs,
        n_inputs: m.n_inputs,
        measurements,
        dual,
    })
    .expect("serialize frame")
}

pub fn frame_from_json(text: &str) -> Result<TomographyFrame> {
    let file: FrameFile =
        serde_json::from_str(text).map_err(|e| Error::format(format!("frame: {e}")))?;
    let mut ops = Vec::with_capacity(file.n_outputs * file.n_inputs);
    for y in 0..file.n_inputs {
        for b in 0..file.n_outputs {
            let key = format!("{b}|{y}");
            let m = file
                .measurements
                .get(&key)
                .ok_or_else(|| Error::format(format!("frame: missing measurement '{key}'")))?;
            ops.push(matrix_from_json(m, &key)?);
        }
    }
    let meas = MeasurementSet::new(file.dim, file.n_outputs, file.n_inputs, ops)?;
    // duals are informational; rebuild and revalidate them from scratch
    TomographyFrame::new(meas, file.name)
}

#[derive(Serialize, Deserialize)]
struct RealizationFile {
    alice_dim: usize,
    bob_dim: usize,
    state: Vec<[f64; 2]>,
    n_outputs: usize,
    n_inputs: usize,
    projectors: BTreeMap<String, JsonMatrix>,
}

pub fn realization_to_json(r: &Realization) -> String {
    let mut projectors = BTreeMap::new();
    for x in 0..r.measurements.n_inputs {
        for a in 0..r.measurements.n_outputs {
            projectors.insert(format!("{a}|{x}"), matrix_to_json(r.measurements.op(a, x)));
        }
    }
    serde_json::to_string_pretty(&RealizationFile {
        alice_dim: r.alice_dim,
        bob_dim: r.bob_dim,
        state: r.state.iter().map(|z| [z.re, z.im]).collect(),
        n_outputs: r.measurements.n_outputs,
        n_inputs: r.measurements.n_inputs,
        projectors,
    })
    .expect("serialize realization")
}

pub fn realization_from_json(text: &str) -> Result<Realization> {
    let file: RealizationFile =
        serde_json::from_str(text).map_err(|e| Error::format(format!("realization: {e}")))?;
    if file.state.len() != file.alice_dim * file.bob_dim {
        return Err(Error::format(format!(
            "realization: state length {} does not match alice_dim·bob_dim = {}",
            file.state.len(),
            file.alice_dim * file.bob_dim
        )));
    }
    let mut ops = Vec::new();
    for x in 0..file.n_inputs {
        for a in 0..file.n_outputs {
            let key = format!("{a}|{x}");
            let m = file
                .projectors
                .get(&key)
                .ok_or_else(|| Error::format(format!("realization: missing projector '{key}'")))?;
            ops.push(matrix_from_json(m, &key)?);
        }
    }
    let measurements = MeasurementSet::new(file.alice_dim, file.n_outputs, file.n_inputs, ops)?;
    Ok(Realization {
        alice_dim: file.alice_dim,
        bob_dim: file.bob_dim,
        state: file.state.iter().map(|z| c64::new(z[0], z[1])).collect(),
        measurements,
    })
}

#[derive(Serialize, Deserialize)]
struct MomentFile {
    kind: String,
    block_dim: usize,
    layout: Vec<[usize; 2]>,
    words: Vec<String>,
    entries: JsonMatrix,
}

pub fn moment_to_json(m: &MomentMatrix) -> String {
    serde_json::to_string_pretty(&MomentFile {
        kind: match m.kind {
            MomentKind::Scalar => "bell".into(),
            MomentKind::Block(_) => "epr".into(),
        },
        block_dim: m.block_dim(),
        layout: m.layout.0.iter().map(|d| [d.n_outputs, d.n_inputs]).collect(),
        words: m.words.iter().map(|w| w.to_text()).collect(),
        entries: matrix_to_json(&m.entries),
    })
    .expect("serialize moment matrix")
}

pub fn moment_from_json(text: &str) -> Result<MomentMatrix> {
    let file: MomentFile =
        serde_json::from_str(text).map_err(|e| Error::format(format!("moment matrix: {e}")))?;
    let kind = match file.kind.as_str() {
        "bell" => MomentKind::Scalar,
        "epr" => MomentKind::Block(file.block_dim),
        other => return Err(Error::format(format!("moment matrix: unknown kind '{other}'"))),
    };
    if kind == MomentKind::Scalar && file.block_dim != 1 {
        return Err(Error::format("bell moment matrices have block_dim 1"));
    }
    let layout = PartyLayout(
        file.layout
            .iter()
            .map(|&[o, i]| PartyDims {
                n_outputs: o,
                n_inputs: i,
            })
            .collect(),
    );
    let words: Vec<Word> = file
        .words
        .iter()
        .map(|s| Word::from_text(s))
        .collect::<Result<_>>()?;
    let entries = matrix_from_json(&file.entries, "entries")?;
    let expected = words.len() * file.block_dim;
    if entries.rows != expected || entries.cols != expected {
        return Err(Error::format(format!(
            "moment matrix: entries are {}x{} but {} words × block {} need {expected}",
            entries.rows,
            entries.cols,
            words.len(),
            file.block_dim
        )));
    }
    Ok(MomentMatrix {
        layout,
        words,
        kind,
        entries,
    })
}

/// Sniff the kind of a JSON artifact by its top-level fields.
pub fn detect_kind(text: &str) -> Result<ArtifactKind> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::format(format!("{e}")))?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::format("expected a JSON object"))?;
    if obj.contains_key("elements") {
        Ok(ArtifactKind::Assemblage)
    } else if obj.contains_key("p") {
        Ok(ArtifactKind::Correlation)
    } else if obj.contains_key("words") {
        Ok(ArtifactKind::MomentMatrix)
    } else if obj.contains_key("projectors") {
        Ok(ArtifactKind::Realization)
    } else if obj.contains_key("measurements") && obj.contains_key("dual") {
        Ok(ArtifactKind::Frame)
    } else {
        Err(Error::format(
            "unrecognized artifact: expected assemblage, correlation, moment matrix, realization or frame",
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Assemblage,
    Correlation,
    MomentMatrix,
    Realization,
    Frame,
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}
