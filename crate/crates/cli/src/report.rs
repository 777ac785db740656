//! Serializable report bodies. Field order is declaration order and every
//! map is a BTreeMap, so identical runs serialize byte-identically.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Matrix3, Vector3};
use nlslab_core::{
    CoercivityBound, ConservedQuantitySpec, EigenStructure, Gl2Transform, NormalizationResult,
};
use serde::Serialize;

pub const SCHEMA: &str = "nlslab-report/v1";

pub fn vec3(v: &Vector3<f64>) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

pub fn mat3(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

pub fn mat2(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Echo of the resolved system: every report states what it analyzed.
#[derive(Serialize)]
pub struct SystemBlock {
    pub matrix: [[f64; 3]; 3],
    pub vector: [f64; 3],
    pub coefficients: [f64; 12],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template: Option<TemplateBlock>,
}

#[derive(Serialize)]
pub struct TemplateBlock {
    pub tag: String,
    pub params: BTreeMap<String, f64>,
    pub disguised: bool,
}

impl SystemBlock {
    pub fn from_resolved(r: &crate::config::ResolvedSystem) -> Self {
        let cv = r.coefficients();
        SystemBlock {
            matrix: mat3(&r.system.a),
            vector: vec3(&r.system.v),
            coefficients: cv.c,
            template: r.template.as_ref().map(|form| TemplateBlock {
                tag: form.tag().as_str().to_string(),
                params: form
                    .params()
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
                disguised: r.disguise.is_some(),
            }),
        }
    }
}

#[derive(Serialize)]
pub struct EigenpairBlock {
    pub value: f64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub eigenbasis: Vec<[f64; 3]>,
    pub generalized_basis: Vec<[f64; 3]>,
}

#[derive(Serialize)]
pub struct EigenBlock {
    pub rank: usize,
    pub borderline: bool,
    pub cluster_tol: f64,
    pub real: Vec<EigenpairBlock>,
    pub complex_pair: Option<[f64; 2]>,
}

impl EigenBlock {
    pub fn from_core(e: &EigenStructure) -> Self {
        EigenBlock {
            rank: e.rank,
            borderline: e.borderline,
            cluster_tol: e.cluster_tol,
            real: e
                .real
                .iter()
                .map(|p| EigenpairBlock {
                    value: p.value,
                    algebraic_multiplicity: p.algebraic_multiplicity,
                    geometric_multiplicity: p.geometric_multiplicity(),
                    eigenbasis: p.eigenbasis.iter().map(vec3).collect(),
                    generalized_basis: p.generalized_basis.iter().map(vec3).collect(),
                })
                .collect(),
            complex_pair: e.complex_pair.map(|(re, im)| [re, im]),
        }
    }
}

#[derive(Serialize)]
pub struct AssumptionBlock {
    pub lambdas: Vec<f64>,
    pub witnesses: Vec<[f64; 3]>,
}

#[derive(Serialize)]
pub struct QuantityBlock {
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub lambda1: f64,
    pub lambda2: f64,
    pub exponents: [f64; 2],
    pub coercive: bool,
    pub ratio: bool,
    pub formula: String,
}

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!("({}, {}, {})", v[0], v[1], v[2])
}

impl QuantityBlock {
    pub fn from_spec(s: &ConservedQuantitySpec) -> Self {
        let formula = if s.ratio {
            format!("Q{}(phi) / Q{}(phi)", fmt_vec(&s.a1), fmt_vec(&s.a2))
        } else {
            format!(
                "|Q{}(phi)|^{} * |Q{}(phi)|^{}",
                fmt_vec(&s.a1),
                s.exponents.0,
                fmt_vec(&s.a2),
                s.exponents.1
            )
        };
        QuantityBlock {
            a1: vec3(&s.a1),
            a2: vec3(&s.a2),
            lambda1: s.lambda1,
            lambda2: s.lambda2,
            exponents: [s.exponents.0, s.exponents.1],
            coercive: s.coercive,
            ratio: s.ratio,
            formula,
        }
    }
}

#[derive(Serialize)]
pub struct CoercivityBlock {
    pub c_minus: f64,
    pub c_plus: f64,
    pub degree: f64,
    pub ratio_bound: f64,
}

impl CoercivityBlock {
    pub fn from_core(b: &CoercivityBound) -> Self {
        CoercivityBlock {
            c_minus: b.c_minus,
            c_plus: b.c_plus,
            degree: b.degree,
            ratio_bound: b.ratio_bound,
        }
    }
}

#[derive(Serialize)]
pub struct WitnessBlock {
    pub name: String,
    pub vector: [f64; 3],
}

#[derive(Serialize)]
pub struct AnalyzeReport {
    pub schema: &'static str,
    pub kind: &'static str,
    pub system: SystemBlock,
    pub eigen: EigenBlock,
    pub case_label: String,
    pub wngc: bool,
    pub assumption1: Option<AssumptionBlock>,
    pub assumption2: Option<AssumptionBlock>,
    pub witnesses: Vec<WitnessBlock>,
    pub borderline: bool,
    /// Present when the classification is borderline: what tripped it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub borderline_detail: Option<String>,
    pub conserved_quantities: Vec<QuantityBlock>,
    /// Why the list above is empty, when it is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conserved_quantities_note: Option<String>,
    pub coercivity: Option<CoercivityBlock>,
}

#[derive(Serialize)]
pub struct TransformBlock {
    pub m: [[f64; 2]; 2],
    pub det: f64,
}

impl TransformBlock {
    pub fn from_core(t: &Gl2Transform) -> Self {
        TransformBlock {
            m: mat2(&t.m),
            det: t.det,
        }
    }
}

#[derive(Serialize)]
pub struct StepBlock {
    pub name: String,
    pub transform: TransformBlock,
}

#[derive(Serialize)]
pub struct NormalizeReport {
    pub schema: &'static str,
    pub kind: &'static str,
    pub system: SystemBlock,
    pub m_total: TransformBlock,
    pub steps: Vec<StepBlock>,
    pub form_tag: String,
    pub params: BTreeMap<String, f64>,
    pub a_standard: SystemStateBlock,
}

#[derive(Serialize)]
pub struct SystemStateBlock {
    pub matrix: [[f64; 3]; 3],
    pub vector: [f64; 3],
}

impl NormalizeReport {
    pub fn new(system: SystemBlock, r: &NormalizationResult) -> Self {
        NormalizeReport {
            schema: SCHEMA,
            kind: "normalize",
            system,
            m_total: TransformBlock::from_core(&r.m_total),
            steps: r
                .steps
                .iter()
                .map(|s| StepBlock {
                    name: s.name.to_string(),
                    transform: TransformBlock::from_core(&s.transform),
                })
                .collect(),
            form_tag: r.form_tag().as_str().to_string(),
            params: r
                .params()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            a_standard: SystemStateBlock {
                matrix: mat3(&r.a_standard.a),
                vector: vec3(&r.a_standard.v),
            },
        }
    }
}

#[derive(Serialize)]
pub struct OdeQuantitySummary {
    pub formula: String,
    pub coercive: bool,
    /// First defined value; absent when the quantity is undefined along the
    /// whole trajectory (zero base under a negative exponent).
    pub initial: Option<f64>,
    pub drift_abs: Option<f64>,
    /// Relative drift; additionally needs a nonzero initial value.
    pub drift_rel: Option<f64>,
}

#[derive(Serialize)]
pub struct OdeReport {
    pub schema: &'static str,
    pub kind: &'static str,
    pub system: SystemBlock,
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub mass_min: f64,
    pub mass_max: f64,
    /// Observed sup/inf mass ratio over the trajectory; absent when the
    /// trajectory touches zero mass.
    pub global_bound_ratio: Option<f64>,
    /// Coercivity-derived ceiling for the ratio, when one exists.
    pub ratio_bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub quantities: Vec<OdeQuantitySummary>,
}

#[derive(Serialize)]
pub struct PdeBands {
    pub linf: [f64; 2],
    pub l2: [f64; 2],
}

#[derive(Serialize)]
pub struct PdeReport {
    pub schema: &'static str,
    pub kind: &'static str,
    pub system: SystemBlock,
    pub eps: f64,
    pub n: usize,
    pub ell: f64,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    pub fit_window: [f64; 2],
    pub linf_slope: f64,
    pub l2_slope: f64,
    pub y_proxy: f64,
    pub w_sup_max: f64,
    pub w_mismatch_max: f64,
    /// Reference decay bands for the eps = 0.1 configuration.
    pub bands: PdeBands,
    /// "pass" | "fail" against the bands, or "floor" when the profile
    /// equation is exact and the slopes measure only the dilation remainder.
    pub verdict: String,
}

#[derive(Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub dir: String,
    pub substitutions: BTreeMap<String, serde_json::Value>,
    pub status: String,
    pub exit_code: i32,
    pub error: Option<String>,
}

#[derive(Serialize)]
pub struct SweepIndex {
    pub schema: &'static str,
    pub kind: &'static str,
    pub command: String,
    pub points: Vec<SweepPoint>,
}

#[derive(Serialize)]
pub struct ErrorReport {
    pub schema: &'static str,
    pub kind: &'static str,
    pub command: String,
    pub message: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blow_up_time: Option<f64>,
}

impl ErrorReport {
    pub fn new(command: &str, message: String, exit_code: i32) -> Self {
        ErrorReport {
            schema: SCHEMA,
            kind: "error",
            command: command.to_string(),
            message,
            exit_code,
            blow_up_time: None,
        }
    }
}

/// Shared constructor so every report derives the system echo the same way.
pub fn system_block(r: &crate::config::ResolvedSystem) -> SystemBlock {
    SystemBlock::from_resolved(r)
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}
