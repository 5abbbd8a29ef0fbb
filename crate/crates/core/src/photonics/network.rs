//! Directed-acyclic networks of two-port elements, multiport composition,
//! and the extinction optimizer.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{coupler, phase_shifter, PhotonicsError, TransferMatrix};

type C64 = Complex64;

/// Element of the network description. Both kinds are two-port: couplers
/// mix their rails, shifters delay the second rail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ElementSpec {
    Coupler { name: String, ratio: f64 },
    Shifter { name: String },
}

impl ElementSpec {
    pub fn name(&self) -> &str {
        match self {
            ElementSpec::Coupler { name, .. } | ElementSpec::Shifter { name } => name,
        }
    }
}

/// Serializable network topology: elements, port-to-port edges, and the
/// designated external ports. Port syntax: `element.in0|in1|out0|out1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub elements: Vec<ElementSpec>,
    /// (from output port, to input port)
    pub edges: Vec<(String, String)>,
    /// external input name → element input port
    pub inputs: Vec<(String, String)>,
    /// external output name → element output port
    pub outputs: Vec<(String, String)>,
    /// the two ports that feed detectors (subset of `outputs` names)
    pub designated_outputs: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    External(usize),
    Element { index: usize, port: usize },
}

/// A validated, composable switch network.
#[derive(Debug, Clone)]
pub struct SwitchNetwork {
    spec: NetworkSpec,
    /// topological order of element indices
    order: Vec<usize>,
    /// per element, where each of its two inputs comes from
    feeds: Vec<[Source; 2]>,
    /// phase settings per shifter name (radians)
    phases: BTreeMap<String, f64>,
    /// coupler power ratios per coupler name
    ratios: BTreeMap<String, f64>,
}

impl SwitchNetwork {
    pub fn input_names(&self) -> Vec<&str> {
        self.spec.inputs.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn output_names(&self) -> Vec<&str> {
        self.spec.outputs.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn designated_outputs(&self) -> &[String] {
        &self.spec.designated_outputs
    }

    pub fn phase_names(&self) -> Vec<String> {
        self.phases.keys().cloned().collect()
    }

    pub fn set_phase(&mut self, name: &str, theta: f64) {
        if let Some(v) = self.phases.get_mut(name) {
            *v = theta;
        }
    }

    pub fn phases(&self) -> &BTreeMap<String, f64> {
        &self.phases
    }

    pub fn set_ratio(&mut self, name: &str, ratio: f64) {
        if let Some(v) = self.ratios.get_mut(name) {
            *v = ratio;
        }
    }

    pub fn ratios(&self) -> &BTreeMap<String, f64> {
        &self.ratios
    }

    fn element_matrix(&self, e: &ElementSpec) -> Result<TransferMatrix, PhotonicsError> {
        match e {
            ElementSpec::Coupler { name, .. } => coupler(self.ratios[name]),
            ElementSpec::Shifter { name } => Ok(phase_shifter(self.phases[name])),
        }
    }

    /// Full transfer matrix over ALL external outputs (rows, in spec
    /// order) from all external inputs (columns).
    pub fn transfer(&self) -> Result<DMatrix<C64>, PhotonicsError> {
        let n_in = self.spec.inputs.len();
        // each element's two output amplitudes as rows over inputs
        let mut element_out: Vec<[Vec<C64>; 2]> = vec![
            [vec![C64::from(0.0); n_in], vec![C64::from(0.0); n_in]];
            self.spec.elements.len()
        ];
        let fetch = |element_out: &Vec<[Vec<C64>; 2]>, src: Source| -> Vec<C64> {
            match src {
                Source::External(i) => {
                    let mut v = vec![C64::from(0.0); n_in];
                    v[i] = C64::from(1.0);
                    v
                }
                Source::Element { index, port } => element_out[index][port].clone(),
            }
        };
        for &ei in &self.order {
            let m = self.element_matrix(&self.spec.elements[ei])?;
            let in0 = fetch(&element_out, self.feeds[ei][0]);
            let in1 = fetch(&element_out, self.feeds[ei][1]);
            for col in 0..n_in {
                element_out[ei][0][col] = m.m[(0, 0)] * in0[col] + m.m[(0, 1)] * in1[col];
                element_out[ei][1][col] = m.m[(1, 0)] * in0[col] + m.m[(1, 1)] * in1[col];
            }
        }

        let mut t = DMatrix::<C64>::zeros(self.spec.outputs.len(), n_in);
        for (row, (_, port)) in self.spec.outputs.iter().enumerate() {
            let (ei, p) = parse_out_port(&self.spec, port)
                .expect("validated at build time");
            for col in 0..n_in {
                t[(row, col)] = element_out[ei][p][col];
            }
        }
        Ok(t)
    }

    /// Power fractions |T|² from an external input to each designated
    /// output, in `designated_outputs` order.
    pub fn power_fractions(&self, input: &str) -> Result<Vec<(String, f64)>, PhotonicsError> {
        let t = self.transfer()?;
        let col = self
            .spec
            .inputs
            .iter()
            .position(|(n, _)| n == input)
            .ok_or_else(|| PhotonicsError::Topology(format!("unknown input '{input}'")))?;
        Ok(self
            .spec
            .designated_outputs
            .iter()
            .map(|name| {
                let row = self
                    .spec
                    .outputs
                    .iter()
                    .position(|(n, _)| n == name)
                    .expect("designated outputs validated");
                (name.clone(), t[(row, col)].norm_sqr())
            })
            .collect())
    }
}

fn parse_port(spec: &NetworkSpec, port: &str, prefix: &str) -> Option<(usize, usize)> {
    let (elt, p) = port.rsplit_once('.')?;
    let idx = spec.elements.iter().position(|e| e.name() == elt)?;
    let pnum = match p {
        x if x == format!("{prefix}0") => 0,
        x if x == format!("{prefix}1") => 1,
        _ => return None,
    };
    Some((idx, pnum))
}

fn parse_in_port(spec: &NetworkSpec, port: &str) -> Option<(usize, usize)> {
    parse_port(spec, port, "in")
}

fn parse_out_port(spec: &NetworkSpec, port: &str) -> Option<(usize, usize)> {
    parse_port(spec, port, "out")
}

/// Validate a topology and build the composable network.
///
/// Every element input must be fed exactly once (by an edge or an external
/// input), every element output consumed exactly once (by an edge or an
/// external output), and the element graph must be acyclic.
pub fn compose_network(spec: &NetworkSpec) -> Result<SwitchNetwork, PhotonicsError> {
    let n = spec.elements.len();
    let bad = |msg: String| PhotonicsError::Topology(msg);

    let mut names = BTreeSet::new();
    for e in &spec.elements {
        if !names.insert(e.name().to_string()) {
            return Err(bad(format!("duplicate element name '{}'", e.name())));
        }
    }

    let mut feeds: Vec<[Option<Source>; 2]> = vec![[None, None]; n];
    let mut out_used: Vec<[bool; 2]> = vec![[false; 2]; n];

    for (i, (name, port)) in spec.inputs.iter().enumerate() {
        let (ei, p) = parse_in_port(spec, port)
            .ok_or_else(|| bad(format!("input '{name}' references bad port '{port}'")))?;
        if feeds[ei][p].is_some() {
            return Err(bad(format!("port '{port}' fed more than once")));
        }
        feeds[ei][p] = Some(Source::External(i));
    }
    for (from, to) in &spec.edges {
        let (fe, fp) = parse_out_port(spec, from)
            .ok_or_else(|| bad(format!("edge references bad output port '{from}'")))?;
        let (te, tp) = parse_in_port(spec, to)
            .ok_or_else(|| bad(format!("edge references bad input port '{to}'")))?;
        if out_used[fe][fp] {
            return Err(bad(format!("output port '{from}' used more than once")));
        }
        out_used[fe][fp] = true;
        if feeds[te][tp].is_some() {
            return Err(bad(format!("port '{to}' fed more than once")));
        }
        feeds[te][tp] = Some(Source::Element {
            index: fe,
            port: fp,
        });
    }
    for (name, port) in &spec.outputs {
        let (ei, p) = parse_out_port(spec, port)
            .ok_or_else(|| bad(format!("output '{name}' references bad port '{port}'")))?;
        if out_used[ei][p] {
            return Err(bad(format!("output port '{port}' used more than once")));
        }
        out_used[ei][p] = true;
    }

    let mut resolved = Vec::with_capacity(n);
    for (i, f) in feeds.iter().enumerate() {
        match (f[0], f[1]) {
            (Some(a), Some(b)) => resolved.push([a, b]),
            _ => {
                return Err(bad(format!(
                    "element '{}' has a dangling input port",
                    spec.elements[i].name()
                )))
            }
        }
    }
    for (i, used) in out_used.iter().enumerate() {
        if !(used[0] && used[1]) {
            return Err(bad(format!(
                "element '{}' has a dangling output port",
                spec.elements[i].name()
            )));
        }
    }
    for name in &spec.designated_outputs {
        if !spec.outputs.iter().any(|(n, _)| n == name) {
            return Err(bad(format!("designated output '{name}' is not an output")));
        }
    }

    // Kahn topological sort over element dependencies
    let mut indegree = vec![0usize; n];
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ei, f) in resolved.iter().enumerate() {
        for s in f {
            if let Source::Element { index, .. } = s {
                indegree[ei] += 1;
                dependents[*index].push(ei);
            }
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop() {
        order.push(i);
        for &d in &dependents[i] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                queue.push(d);
            }
        }
    }
    if order.len() != n {
        return Err(bad("topology contains a cycle".to_string()));
    }
    order.sort_by_key(|&i| depth(&resolved, i));

    let mut phases = BTreeMap::new();
    let mut ratios = BTreeMap::new();
    for e in &spec.elements {
        match e {
            ElementSpec::Coupler { name, ratio } => {
                if !(0.0..=1.0).contains(ratio) {
                    return Err(PhotonicsError::RatioDomain(*ratio));
                }
                ratios.insert(name.clone(), *ratio);
            }
            ElementSpec::Shifter { name } => {
                phases.insert(name.clone(), 0.0);
            }
        }
    }

    Ok(SwitchNetwork {
        spec: spec.clone(),
        order,
        feeds: resolved,
        phases,
        ratios,
    })
}

fn depth(feeds: &[[Source; 2]], i: usize) -> usize {
    feeds[i]
        .iter()
        .map(|s| match s {
            Source::External(_) => 0,
            Source::Element { index, .. } => depth(feeds, *index) + 1,
        })
        .max()
        .unwrap_or(0)
}

/// Result of an extinction optimization.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizedExtinction {
    /// Phase settings (radians) that minimize the dark-port power.
    pub phases: BTreeMap<String, f64>,
    pub extinction_db: f64,
    pub min_power: f64,
    pub max_power: f64,
}

/// Minimize the power reaching `target_output` from `dark_input` over all
/// free phases; extinction is reported against the maximum achievable
/// power at the same port.
///
/// Coarse grids (4096 points for one phase, 64×64 for two, cyclic
/// coordinate sweeps above that) seed a Nelder-Mead refinement.
pub fn optimize_extinction(
    network: &SwitchNetwork,
    target_output: &str,
    dark_input: &str,
) -> Result<OptimizedExtinction, PhotonicsError> {
    let names = network.phase_names();
    let power_at = |net: &SwitchNetwork| -> Result<f64, PhotonicsError> {
        let fractions = net.power_fractions(dark_input)?;
        fractions
            .iter()
            .find(|(n, _)| n == target_output)
            .map(|(_, p)| *p)
            .ok_or_else(|| {
                PhotonicsError::Topology(format!("'{target_output}' is not a designated output"))
            })
    };
    // verify ports exist before sweeping
    power_at(network)?;

    let eval = |phases: &[f64]| -> f64 {
        let mut net = network.clone();
        for (n, v) in names.iter().zip(phases) {
            net.set_phase(n, *v);
        }
        power_at(&net).unwrap_or(f64::INFINITY)
    };

    let min = optimize(&eval, names.len(), false);
    let max = optimize(&eval, names.len(), true);

    let min_power = min.1.max(f64::MIN_POSITIVE);
    let extinction_db = 10.0 * (max.1 / min_power).log10();

    // perfect 50:50 couplers admit an exact null; falling short flags a
    // model or optimizer defect
    let perfect = network.ratios.values().all(|r| (r - 0.5).abs() < 1e-9);
    if perfect && extinction_db < 25.0 {
        return Err(PhotonicsError::OptimizationShortfall {
            achieved_db: extinction_db,
            expected_db: 25.0,
        });
    }

    let mut phases = BTreeMap::new();
    for (n, v) in names.iter().zip(&min.0) {
        phases.insert(n.clone(), v.rem_euclid(std::f64::consts::TAU));
    }
    Ok(OptimizedExtinction {
        phases,
        extinction_db,
        min_power,
        max_power: max.1,
    })
}

/// Maximize the power routed from `input` to `target_output`; returns the
/// phase settings and the achieved power fraction.
pub fn optimize_routing(
    network: &SwitchNetwork,
    target_output: &str,
    input: &str,
) -> Result<(BTreeMap<String, f64>, f64), PhotonicsError> {
    let names = network.phase_names();
    let power_at = |net: &SwitchNetwork| -> Result<f64, PhotonicsError> {
        let fractions = net.power_fractions(input)?;
        fractions
            .iter()
            .find(|(n, _)| n == target_output)
            .map(|(_, p)| *p)
            .ok_or_else(|| {
                PhotonicsError::Topology(format!("'{target_output}' is not a designated output"))
            })
    };
    power_at(network)?;
    let eval = |phases: &[f64]| -> f64 {
        let mut net = network.clone();
        for (n, v) in names.iter().zip(phases) {
            net.set_phase(n, *v);
        }
        power_at(&net).unwrap_or(0.0)
    };
    let (best, power) = optimize(&eval, names.len(), true);
    let mut phases = BTreeMap::new();
    for (n, v) in names.iter().zip(&best) {
        phases.insert(n.clone(), v.rem_euclid(std::f64::consts::TAU));
    }
    Ok((phases, power))
}

fn optimize(eval: &dyn Fn(&[f64]) -> f64, n: usize, maximize: bool) -> (Vec<f64>, f64) {
    // a log transform turns the quadratic basin around a deep null into a
    // well-conditioned valley for the simplex
    let f = |p: &[f64]| {
        if maximize {
            -eval(p)
        } else {
            (eval(p) + 1e-300).ln()
        }
    };
    let tau = std::f64::consts::TAU;

    // coarse seeds: keep the best few grid cells for multi-start refinement
    let mut seeds: Vec<(Vec<f64>, f64)> = Vec::new();
    let push_seed = |p: Vec<f64>, v: f64, seeds: &mut Vec<(Vec<f64>, f64)>| {
        seeds.push((p, v));
        seeds.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        seeds.truncate(4);
    };
    match n {
        0 => return (Vec::new(), eval(&[])),
        1 => {
            for i in 0..4096 {
                let p = vec![tau * i as f64 / 4096.0];
                let v = f(&p);
                push_seed(p, v, &mut seeds);
            }
        }
        2 => {
            for i in 0..64 {
                for j in 0..64 {
                    let p = vec![tau * i as f64 / 64.0, tau * j as f64 / 64.0];
                    let v = f(&p);
                    push_seed(p, v, &mut seeds);
                }
            }
        }
        _ => {
            // cyclic coordinate sweeps from the origin
            let mut p = vec![0.0; n];
            for _ in 0..3 {
                for k in 0..n {
                    let mut local = (p[k], f(&p));
                    for i in 0..256 {
                        let mut q = p.clone();
                        q[k] = tau * i as f64 / 256.0;
                        let v = f(&q);
                        if v < local.1 {
                            local = (q[k], v);
                        }
                    }
                    p[k] = local.0;
                }
            }
            let v = f(&p);
            push_seed(p, v, &mut seeds);
        }
    }

    let mut best = seeds[0].clone();
    for (seed, _) in &seeds {
        for scale in [0.15, 0.01] {
            let refined = nelder_mead(&f, seed, scale, 600);
            if refined.1 < best.1 {
                best = refined;
            }
        }
    }
    // final polish around the optimum
    let polished = nelder_mead(&f, &best.0, 1e-4, 400);
    if polished.1 < best.1 {
        best = polished;
    }

    if maximize {
        (best.0, -best.1)
    } else {
        (best.0.clone(), eval(&best.0))
    }
}

/// Plain Nelder-Mead simplex minimization.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    scale: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += scale;
        let v = f(&p);
        simplex.push((p, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() < 1e-30 + 1e-16 * best.abs() {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let point = |coef: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + coef * (simplex[n].0[j] - centroid[j]))
                .collect()
        };
        let reflected = point(-1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = point(-2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = point(0.5);
            let fc = f(&contracted);
            if fc < simplex[n].1 {
                simplex[n] = (contracted, fc);
            } else {
                let best_point = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = item
                        .0
                        .iter()
                        .zip(&best_point)
                        .map(|(a, b)| b + 0.5 * (a - b))
                        .collect();
                    let v = f(&shrunk);
                    *item = (shrunk, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex[0].clone()
}

/// A standalone dCPS-MZI network (2 inputs → 2 outputs, phases θ and φ).
pub fn dcps_network(ratios: [f64; 4]) -> NetworkSpec {
    NetworkSpec {
        elements: vec![
            ElementSpec::Coupler {
                name: "c1".into(),
                ratio: ratios[0],
            },
            ElementSpec::Shifter {
                name: "theta".into(),
            },
            ElementSpec::Coupler {
                name: "c2".into(),
                ratio: ratios[1],
            },
            ElementSpec::Coupler {
                name: "c3".into(),
                ratio: ratios[2],
            },
            ElementSpec::Shifter { name: "phi".into() },
            ElementSpec::Coupler {
                name: "c4".into(),
                ratio: ratios[3],
            },
        ],
        edges: chain_edges(&["c1", "theta", "c2", "c3", "phi", "c4"]),
        inputs: vec![
            ("in0".into(), "c1.in0".into()),
            ("in1".into(), "c1.in1".into()),
        ],
        outputs: vec![
            ("bar".into(), "c4.out0".into()),
            ("cross".into(), "c4.out1".into()),
        ],
        designated_outputs: vec!["bar".into(), "cross".into()],
    }
}

/// Edges wiring a list of two-port elements in series on both rails.
pub fn chain_edges(names: &[&str]) -> Vec<(String, String)> {
    names
        .windows(2)
        .flat_map(|w| {
            vec![
                (format!("{}.out0", w[0]), format!("{}.in0", w[1])),
                (format!("{}.out1", w[0]), format!("{}.in1", w[1])),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonics::dcps_mzi;
    use crate::rng::Stream;

    #[test]
    fn dcps_network_matches_direct_cascade() {
        let ratios = [0.45, 0.55, 0.48, 0.52];
        let mut net = compose_network(&dcps_network(ratios)).unwrap();
        net.set_phase("theta", 1.1);
        net.set_phase("phi", 2.3);
        let t = net.transfer().unwrap();
        let direct = dcps_mzi(1.1, 2.3, ratios).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((t[(r, c)] - direct.m[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn network_transfer_is_unitary() {
        let mut s = Stream::new(31, 0);
        for _ in 0..50 {
            let ratios = [
                s.uniform(0.3, 0.7),
                s.uniform(0.3, 0.7),
                s.uniform(0.3, 0.7),
                s.uniform(0.3, 0.7),
            ];
            let mut net = compose_network(&dcps_network(ratios)).unwrap();
            net.set_phase("theta", s.uniform(0.0, std::f64::consts::TAU));
            net.set_phase("phi", s.uniform(0.0, std::f64::consts::TAU));
            let t = net.transfer().unwrap();
            let g = t.adjoint() * &t;
            for i in 0..2 {
                for j in 0..2 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g[(i, j)].norm() - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn dangling_port_rejected() {
        let mut spec = dcps_network([0.5, 0.5, 0.5, 0.5]);
        spec.outputs.pop();
        let err = compose_network(&spec);
        assert!(matches!(err, Err(PhotonicsError::Topology(_))));
    }

    #[test]
    fn double_fed_port_rejected() {
        let mut spec = dcps_network([0.5, 0.5, 0.5, 0.5]);
        spec.edges.push(("c1.out0".into(), "c2.in0".into()));
        assert!(matches!(
            compose_network(&spec),
            Err(PhotonicsError::Topology(_))
        ));
    }

    #[test]
    fn perfect_dcps_reaches_deep_null() {
        let net = compose_network(&dcps_network([0.5, 0.5, 0.5, 0.5])).unwrap();
        let opt = optimize_extinction(&net, "cross", "in0").unwrap();
        assert!(opt.extinction_db > 100.0, "extinction {}", opt.extinction_db);
    }

    #[test]
    fn imperfect_dcps_beats_60_db_and_single_mzi() {
        let ratios = [0.45, 0.55, 0.48, 0.52];
        let net = compose_network(&dcps_network(ratios)).unwrap();
        let opt = optimize_extinction(&net, "cross", "in0").unwrap();
        assert!(opt.extinction_db > 60.0, "dcps {}", opt.extinction_db);

        // single-MZI ceiling from a 1e-3-radian grid oracle
        let mut min_p = f64::INFINITY;
        let mut max_p: f64 = 0.0;
        let mut theta = 0.0;
        while theta < std::f64::consts::TAU {
            let p = crate::photonics::mzi(theta, ratios[0], ratios[1])
                .unwrap()
                .power(1, 0);
            min_p = min_p.min(p);
            max_p = max_p.max(p);
            theta += 1e-3;
        }
        let single_db = 10.0 * (max_p / min_p).log10();
        assert!(
            opt.extinction_db >= single_db,
            "dcps {} vs single {}",
            opt.extinction_db,
            single_db
        );
    }

    #[test]
    fn optimizer_matches_dense_grid_on_perturbed_networks() {
        let mut s = Stream::new(71, 0);
        for _ in 0..3 {
            let ratios = [
                0.5 * (1.0 + s.uniform(-0.05, 0.05)),
                0.5 * (1.0 + s.uniform(-0.05, 0.05)),
                0.5 * (1.0 + s.uniform(-0.05, 0.05)),
                0.5 * (1.0 + s.uniform(-0.05, 0.05)),
            ];
            let net = compose_network(&dcps_network(ratios)).unwrap();
            let opt = optimize_extinction(&net, "cross", "in0").unwrap();

            // dense 1e-3-radian oracle over (θ, φ)
            let mut grid_min = f64::INFINITY;
            let steps = (std::f64::consts::TAU / 1e-3) as usize;
            for i in 0..steps {
                let th = i as f64 * 1e-3;
                for j in 0..steps {
                    let p = dcps_mzi(th, j as f64 * 1e-3, ratios).unwrap().power(1, 0);
                    if p < grid_min {
                        grid_min = p;
                    }
                }
            }
            let grid_db = 10.0 * (opt.max_power / grid_min).log10();
            assert!(
                opt.extinction_db >= grid_db - 0.5,
                "optimizer {} vs grid {}",
                opt.extinction_db,
                grid_db
            );
        }
    }
}
