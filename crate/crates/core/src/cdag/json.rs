//! `cdag/1` JSON documents.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Cdag, CdagError, DraftCdag, Meta};
use crate::vertex::{Role, VertexId};

pub const SCHEMA: &str = "cdag/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    schema: String,
    meta: Meta,
    vertices: Vec<VertexDoc>,
    edges: Vec<(String, String)>,
    /// Linear-combination coefficients parallel to `edges`; omitted when all
    /// are 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<i64>>,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: String,
    role: String,
}

fn to_doc(g: &Cdag) -> Doc {
    let name = |v: u32| g.id(v).to_string();
    let vertices = (0..g.vertex_count() as u32)
        .map(|v| VertexDoc {
            id: name(v),
            role: g.role(v).as_str().to_string(),
        })
        .collect();
    let mut edges = Vec::with_capacity(g.edge_count());
    let mut weights = Vec::with_capacity(g.edge_count());
    for v in 0..g.vertex_count() as u32 {
        for (&u, &w) in g.preds(v).iter().zip(g.pred_weights(v)) {
            edges.push((name(u), name(v)));
            weights.push(w);
        }
    }
    let weights = weights.iter().any(|&w| w != 1).then_some(weights);
    Doc {
        schema: SCHEMA.to_string(),
        meta: g.meta().clone(),
        vertices,
        edges,
        weights,
        inputs: g.inputs().iter().map(|&v| name(v)).collect(),
        outputs: g.outputs().iter().map(|&v| name(v)).collect(),
    }
}

pub fn to_json_value(g: &Cdag) -> serde_json::Value {
    serde_json::to_value(to_doc(g)).expect("cdag document serializes")
}

pub fn to_json(g: &Cdag) -> String {
    serde_json::to_string(&to_doc(g)).expect("cdag document serializes")
}

pub fn from_json(text: &str) -> Result<Cdag, CdagError> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| CdagError::Schema(e.to_string()))?;
    if doc.schema != SCHEMA {
        return Err(CdagError::Schema(format!(
            "expected schema `{SCHEMA}`, found `{}`",
            doc.schema
        )));
    }
    if let Some(w) = &doc.weights {
        if w.len() != doc.edges.len() {
            return Err(CdagError::Schema(format!(
                "{} weights for {} edges",
                w.len(),
                doc.edges.len()
            )));
        }
    }

    let mut draft = DraftCdag::new(doc.meta);
    let mut index: HashMap<String, u32> = HashMap::with_capacity(doc.vertices.len());
    for vd in doc.vertices {
        let role: Role = vd.role.parse()?;
        let id: VertexId = vd.id.parse()?;
        if id.role != role {
            return Err(CdagError::Schema(format!(
                "vertex {} declares role `{}`",
                vd.id, vd.role
            )));
        }
        if index.contains_key(&vd.id) {
            return Err(CdagError::DuplicateVertex(vd.id));
        }
        let v = draft.add_vertex(id);
        index.insert(vd.id, v);
    }
    let resolve = |s: &String| {
        index
            .get(s)
            .copied()
            .ok_or_else(|| CdagError::DanglingEdge(s.clone()))
    };
    for (k, (u, v)) in doc.edges.iter().enumerate() {
        let w = doc.weights.as_ref().map_or(1, |w| w[k]);
        draft.add_weighted_edge(resolve(u)?, resolve(v)?, w);
    }
    for s in &doc.inputs {
        draft.declare_input(resolve(s)?);
    }
    for s in &doc.outputs {
        draft.declare_output(resolve(s)?);
    }
    draft.seal()
}
