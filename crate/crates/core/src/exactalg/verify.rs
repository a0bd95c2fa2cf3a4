use std::collections::HashMap;

use num::{One, Zero};
use serde::Serialize;
use serde_json::json;

use super::action::{FiniteAction, Permutation};
use super::partition::{cond_exp, Partition};
use super::space::{FiniteSpace, Q};
use super::ExactError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    PreconditionFailed,
    Skipped,
}

/// One checked identity, serialized as `{identity, status, witness?}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl IdentityReport {
    fn pass(identity: impl Into<String>) -> Self {
        IdentityReport {
            identity: identity.into(),
            status: Status::Pass,
            witness: None,
        }
    }

    fn fail(identity: impl Into<String>, witness: serde_json::Value) -> Self {
        IdentityReport {
            identity: identity.into(),
            status: Status::Fail,
            witness: Some(witness),
        }
    }

    fn hypothesis(identity: impl Into<String>, holds: bool, witness: serde_json::Value) -> Self {
        IdentityReport {
            identity: identity.into(),
            status: if holds {
                Status::Pass
            } else {
                Status::PreconditionFailed
            },
            witness: (!holds).then_some(witness),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn strings(v: &[Q]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// Exhaustive check of the commutation result for a `Z^2` action `U`, a
/// `U`-invariant sigma-algebra `F` and a sub-sigma-algebra `C` of `F`, with
/// `J` the `U`-invariant sets:
///
/// * (a) `E[f | F]` is `J v C`-measurable for `f` measurable w.r.t. `J v C`;
/// * (b) `E[f | J v C]` is `F`-measurable for `F`-measurable `f`;
/// * (c) `E[E[f | J v C] | F] = E[E[f | F] | J v C] = E[f | F n (J v C)]`.
///
/// (a) and (b) run over block indicators, (c) over point indicators.
/// Violated hypotheses are reported as `precondition_failed` and the
/// identities are then `skipped`.
pub fn verify_prop_pro(
    space: &FiniteSpace,
    action: &FiniteAction,
    invariant: &Partition,
    coarse: &Partition,
) -> Result<Vec<IdentityReport>, ExactError> {
    for size in [action.size(), invariant.size(), coarse.size()] {
        if size != space.size() {
            return Err(ExactError::SizeMismatch {
                left: space.size(),
                right: size,
            });
        }
    }
    let mut reports = vec![
        IdentityReport::hypothesis(
            "hypothesis: Z^2 action",
            action.dim() == 2,
            json!({ "generators": action.dim() }),
        ),
        IdentityReport::hypothesis(
            "hypothesis: action preserves the measure",
            action.preserves(space),
            json!(null),
        ),
    ];
    let mut not_invariant = Vec::new();
    for (t, g) in action.generators().iter().enumerate() {
        if !g.leaves_invariant(invariant)? {
            not_invariant.push(t);
        }
    }
    reports.push(IdentityReport::hypothesis(
        "hypothesis: F is invariant under every generator",
        not_invariant.is_empty(),
        json!({ "generators": not_invariant }),
    ));
    reports.push(IdentityReport::hypothesis(
        "hypothesis: C is contained in F",
        invariant.refines(coarse)?,
        json!(null),
    ));
    let names = [
        "(a) E[f|F] is (J v C)-measurable for (J v C)-measurable f",
        "(b) E[f|J v C] is F-measurable for F-measurable f",
        "(c) E[E[f|J v C]|F] = E[E[f|F]|J v C] = E[f|F n (J v C)]",
    ];
    if reports.iter().any(|r| !r.passed()) {
        reports.extend(names.iter().map(|n| IdentityReport {
            identity: n.to_string(),
            status: Status::Skipped,
            witness: None,
        }));
        return Ok(reports);
    }

    let j = action.invariant_partition();
    let jc = j.join(coarse)?;
    let meet = invariant.meet(&jc)?;

    let block_indicator = |p: &Partition, b: usize| -> Vec<Q> {
        p.labels()
            .iter()
            .map(|&l| if l == b { Q::one() } else { Q::zero() })
            .collect()
    };

    let mut a = IdentityReport::pass(names[0]);
    for b in 0..jc.block_count() {
        let e = cond_exp(space, &block_indicator(&jc, b), invariant)?;
        if let Some((x, y)) = jc.measurability_witness(&e) {
            a = IdentityReport::fail(
                names[0],
                json!({ "f": format!("indicator of block {b} of J v C"), "points": [x, y],
                        "values": [e[x].to_string(), e[y].to_string()] }),
            );
            break;
        }
    }
    reports.push(a);

    let mut b_report = IdentityReport::pass(names[1]);
    for b in 0..invariant.block_count() {
        let e = cond_exp(space, &block_indicator(invariant, b), &jc)?;
        if let Some((x, y)) = invariant.measurability_witness(&e) {
            b_report = IdentityReport::fail(
                names[1],
                json!({ "f": format!("indicator of block {b} of F"), "points": [x, y],
                        "values": [e[x].to_string(), e[y].to_string()] }),
            );
            break;
        }
    }
    reports.push(b_report);

    let mut c = IdentityReport::pass(names[2]);
    for point in 0..space.size() {
        let f = space.indicator(point);
        let via_jc = cond_exp(space, &cond_exp(space, &f, &jc)?, invariant)?;
        let via_f = cond_exp(space, &cond_exp(space, &f, invariant)?, &jc)?;
        let direct = cond_exp(space, &f, &meet)?;
        if via_jc != via_f || via_f != direct {
            c = IdentityReport::fail(
                names[2],
                json!({ "f": format!("indicator of point {point}"),
                        "E[E[f|JvC]|F]": strings(&via_jc),
                        "E[E[f|F]|JvC]": strings(&via_f),
                        "E[f|F n (JvC)]": strings(&direct) }),
            );
            break;
        }
    }
    reports.push(c);
    Ok(reports)
}

/// For an ergodic (transitive) measure-preserving `Z^d` action, the
/// sigma-algebras of sets invariant under all generators but one are
/// independent: `mu(A_1 n .. n A_d) = mu(A_1) .. mu(A_d)` for every choice of
/// blocks.
pub fn verify_independence(
    space: &FiniteSpace,
    action: &FiniteAction,
) -> Result<IdentityReport, ExactError> {
    if action.size() != space.size() {
        return Err(ExactError::SizeMismatch {
            left: space.size(),
            right: action.size(),
        });
    }
    if action.dim() < 2 {
        return Err(ExactError::Precondition(
            "independence needs at least two generators".into(),
        ));
    }
    if !action.preserves(space) {
        return Err(ExactError::Precondition(
            "action does not preserve the measure".into(),
        ));
    }
    if !action.is_transitive() {
        return Err(ExactError::Precondition(
            "the action is not ergodic (not transitive on the points)".into(),
        ));
    }
    let d = action.dim();
    let algebras: Vec<Partition> = (0..d)
        .map(|t| {
            let others: Vec<usize> = (0..d).filter(|&s| s != t).collect();
            action.orbit_partition(&others)
        })
        .collect::<Result<_, _>>()?;
    let marginals: Vec<Vec<Q>> = algebras
        .iter()
        .map(|p| p.blocks().into_iter().map(|b| space.measure(b)).collect())
        .collect();
    let mut joint: HashMap<Vec<usize>, Q> = HashMap::new();
    for point in 0..space.size() {
        let key: Vec<usize> = algebras.iter().map(|p| p.label(point)).collect();
        *joint.entry(key).or_insert_with(Q::zero) += space.weight(point);
    }
    let identity = "mu(A_1 n ... n A_d) = mu(A_1)...mu(A_d) for the sub-action invariant algebras";
    let counts: Vec<usize> = algebras.iter().map(Partition::block_count).collect();
    let mut tuple = vec![0usize; d];
    loop {
        let product = tuple
            .iter()
            .enumerate()
            .fold(Q::one(), |acc, (t, &b)| acc * &marginals[t][b]);
        let observed = joint.get(&tuple).cloned().unwrap_or_else(Q::zero);
        if observed != product {
            return Ok(IdentityReport::fail(
                identity,
                json!({ "blocks": tuple, "joint": observed.to_string(),
                        "product": product.to_string() }),
            ));
        }
        // odometer
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(IdentityReport::pass(identity));
            }
            axis -= 1;
            tuple[axis] += 1;
            if tuple[axis] < counts[axis] {
                break;
            }
            tuple[axis] = 0;
        }
    }
}

/// The past generated by a partition under `s`: the join of the preimages of
/// `p` under `s^-k`, `k >= 0`. Its preimage under `s` refines it, so it is a
/// valid base for [`verify_lemma_class`].
pub fn generated_past(s: &Permutation, p: &Partition) -> Result<Partition, ExactError> {
    let back = s.inverse();
    let mut acc = p.clone();
    let mut current = p.clone();
    let mut steps = 0usize;
    loop {
        current = current.pullback(back.as_slice())?;
        if &current == p || steps > s.size() * s.size() + 1 {
            break;
        }
        acc = acc.join(&current)?;
        steps += 1;
    }
    Ok(acc)
}

/// With `F_n` the preimage of `base` under `s^n` (an increasing filtration)
/// and `K` the `s`-invariant sets, checks `K n F_inf = K n F_-inf` where the
/// two limits are computed by iterating until the chain stabilizes.
pub fn verify_lemma_class(
    space: &FiniteSpace,
    s: &Permutation,
    base: &Partition,
) -> Result<IdentityReport, ExactError> {
    if s.size() != space.size() || base.size() != space.size() {
        return Err(ExactError::SizeMismatch {
            left: space.size(),
            right: s.size().max(base.size()),
        });
    }
    if !s.preserves(space) {
        return Err(ExactError::Precondition(
            "transformation does not preserve the measure".into(),
        ));
    }
    if !base.pullback(s.as_slice())?.refines(base)? {
        return Err(ExactError::Precondition(
            "pullback filtration is not monotone: s^-1 F_0 does not refine F_0".into(),
        ));
    }
    let k = FiniteAction::new(vec![s.clone()])?.invariant_partition();
    let limit = s.size() + 2;

    let forward = s.as_slice();
    let mut up = base.clone();
    let mut up_steps = 0;
    while up_steps < limit {
        let next = up.pullback(forward)?;
        if next == up {
            break;
        }
        up = next;
        up_steps += 1;
    }
    let backward = s.inverse();
    let mut down = base.clone();
    let mut down_steps = 0;
    while down_steps < limit {
        let next = down.pullback(backward.as_slice())?;
        if next == down {
            break;
        }
        if !down.refines(&next)? {
            return Err(ExactError::Precondition(
                "backward chain is not decreasing".into(),
            ));
        }
        down = next;
        down_steps += 1;
    }
    let lhs = k.meet(&up)?;
    let rhs = k.meet(&down)?;
    let identity = "K n F_inf = K n F_-inf";
    if lhs == rhs {
        Ok(IdentityReport::pass(identity))
    } else {
        Ok(IdentityReport::fail(
            identity,
            json!({ "K n F_inf": lhs.labels(), "K n F_-inf": rhs.labels(),
                    "steps_up": up_steps, "steps_down": down_steps }),
        ))
    }
}
