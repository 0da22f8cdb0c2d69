//! Named constructions: the 18-ray set, the KCBS pentagram, the Peres 24-ray
//! set and the SHIFT basis.

use std::f64::consts::PI;

use super::{c64, peres24, validate_realization, QuantumError, QuantumRealization, Ray, State};
use crate::scenario::{gamma18, gamma5, validate_scenario, ContextualityScenario, RawScenario};

pub const BUILTIN_NAMES: [&str; 4] = ["cega18", "kcbs", "peres24", "shift"];

#[derive(Debug, Clone)]
pub struct Construction {
    pub name: String,
    pub realization: QuantumRealization,
    /// Distinguished state, when the construction comes with one.
    pub state: Option<State>,
    /// Local dimensions of the tensor factors.
    pub factors: Vec<usize>,
    pub notes: Vec<String>,
}

impl Construction {
    pub fn scenario(&self) -> &ContextualityScenario {
        self.realization.scenario()
    }
}

pub fn builtin_construction(name: &str) -> Result<Construction, QuantumError> {
    match name {
        "cega18" => cega18(),
        "kcbs" => kcbs(),
        "peres24" => peres24_construction(),
        "shift" => shift(),
        other => Err(QuantumError::UnknownName(other.to_string())),
    }
}

/// Rays on vertices `v1..v18` in listing order.
pub fn cega18_rays() -> Vec<[f64; 4]> {
    vec![
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0],
        [1.0, 1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0, -1.0],
        [-1.0, 1.0, 1.0, 1.0],
        [1.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, -1.0, 0.0],
        [1.0, 0.0, 0.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0],
        [0.0, 1.0, 0.0, -1.0],
        [1.0, 0.0, -1.0, 0.0],
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
}

/// Orders rays given by vertex name into the scenario's canonical order.
pub fn rays_by_name(
    h: &ContextualityScenario,
    named: Vec<(String, Ray)>,
) -> Result<Vec<Ray>, QuantumError> {
    let mut slots: Vec<Option<Ray>> = vec![None; h.num_vertices()];
    for (name, ray) in named {
        if let Some(i) = h.vertex_index(&name) {
            slots[i] = Some(ray);
        }
    }
    let filled = slots.iter().filter(|s| s.is_some()).count();
    if filled != h.num_vertices() {
        return Err(QuantumError::IncompleteRealization { expected: h.num_vertices(), actual: filled });
    }
    Ok(slots.into_iter().flatten().collect())
}

fn cega18() -> Result<Construction, QuantumError> {
    let h = validate_scenario(&gamma18())?;
    let named = cega18_rays()
        .iter()
        .enumerate()
        .map(|(i, v)| Ok((format!("v{}", i + 1), Ray::real(v)?)))
        .collect::<Result<Vec<_>, QuantumError>>()?;
    let rays = rays_by_name(&h, named)?;
    Ok(Construction {
        name: "cega18".into(),
        realization: validate_realization(&h, rays)?,
        state: None,
        factors: vec![2, 2],
        notes: vec![],
    })
}

/// The pentagram vectors `l_i` (on `v_i`) and the completions
/// `u_i ∝ l_i × l_{i+1}`, with the state `(0, 0, 1)`.
fn kcbs() -> Result<Construction, QuantumError> {
    let h = validate_scenario(&gamma5())?;
    let cos_t = 5f64.powf(-0.25);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let l: Vec<[f64; 3]> = (1..=5)
        .map(|i| {
            let phi = 4.0 * PI * f64::from(i) / 5.0;
            [sin_t * phi.cos(), sin_t * phi.sin(), cos_t]
        })
        .collect();
    let mut named = Vec::new();
    for i in 0..5 {
        let (a, b) = (l[i], l[(i + 1) % 5]);
        let u = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        named.push((format!("v{}", i + 1), Ray::real(&a)?));
        named.push((format!("u{}", i + 1), Ray::real(&u)?));
    }
    let rays = rays_by_name(&h, named)?;
    Ok(Construction {
        name: "kcbs".into(),
        realization: validate_realization(&h, rays)?,
        state: Some(State::pure(&Ray::real(&[0.0, 0.0, 1.0])?)),
        factors: vec![3],
        notes: vec!["u_i completed as the normalized cross product of l_i and l_(i+1)".into()],
    })
}

fn peres24_construction() -> Result<Construction, QuantumError> {
    let p = peres24();
    let names: Vec<String> = (1..=p.rays.len()).map(|i| format!("r{i:02}")).collect();
    let edges: Vec<Vec<String>> =
        p.bases.iter().map(|b| b.iter().map(|&i| names[i].clone()).collect()).collect();
    let h = validate_scenario(&RawScenario { vertices: names, hyperedges: edges })?;
    Ok(Construction {
        name: "peres24".into(),
        realization: validate_realization(&h, p.rays)?,
        state: None,
        factors: vec![2, 2],
        notes: vec![
            "rays derived as the common eigenbases of the six row/column Pauli triples".into(),
            "hyperedges 1-6 are those eigenbases; the rest are every other orthonormal basis among the rays"
                .into(),
        ],
    })
}

/// SHIFT labels in listing order.
pub const SHIFT_LABELS: [&str; 8] = ["000", "111", "+01", "-01", "1+0", "1-0", "01+", "01-"];

/// Product ray for a label over `0 1 + -`.
pub fn product_ray(label: &str) -> Result<Ray, QuantumError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amp = vec![c64(1.0, 0.0)];
    for ch in label.chars() {
        let q = match ch {
            '0' => [1.0, 0.0],
            '1' => [0.0, 1.0],
            '+' => [h, h],
            '-' => [h, -h],
            _ => return Err(QuantumError::UnknownName(label.to_string())),
        };
        amp = amp.iter().flat_map(|a| q.iter().map(move |&x| a * x)).collect();
    }
    Ray::new(amp)
}

fn shift() -> Result<Construction, QuantumError> {
    let names: Vec<String> = SHIFT_LABELS.iter().map(|s| s.to_string()).collect();
    let h = validate_scenario(&RawScenario { vertices: names.clone(), hyperedges: vec![names.clone()] })?;
    let named = names
        .iter()
        .map(|n| Ok((n.clone(), product_ray(n)?)))
        .collect::<Result<Vec<_>, QuantumError>>()?;
    let rays = rays_by_name(&h, named)?;
    Ok(Construction {
        name: "shift".into(),
        realization: validate_realization(&h, rays)?,
        state: None,
        factors: vec![2, 2, 2],
        notes: vec![],
    })
}
