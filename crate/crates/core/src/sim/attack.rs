//! Attacker placement and the two attack behaviours.
//!
//! FDFF: every attacker periodically sends each benign radio neighbour a data
//! packet carrying a never-seen flow id. The neighbour has no rule for it,
//! asks the controller, and stores the drop rule it gets back, so the
//! attack multiplies flow requests and fills neighbour flow tables.
//!
//! FNI: an attacker that relays another node's neighbour report may rewrite
//! the neighbour list with nodes that are not radio neighbours of the
//! origin. The controller trusts the report and routes through links that
//! do not exist.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::config::{AttackKind, ScenarioConfig};
use super::topology::{Grid, NodeId};
use crate::error::{invalid, Result};

/// Picks `round(fraction * nodes)` attackers uniformly among plain nodes.
pub fn select_attackers<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    grid: &Grid,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    if cfg.attack_kind == AttackKind::None {
        return Ok(Vec::new());
    }
    if cfg.attacker_fraction <= 0.0 {
        return Err(invalid("attack configured with zero attacker fraction"));
    }
    let count = cfg.attacker_count();
    let infra: Vec<NodeId> =
        (0..grid.len()).filter(|&u| grid.role_of_infrastructure(u).is_some()).collect();
    let mut eligible: Vec<NodeId> = (0..grid.len())
        .filter(|u| !infra.contains(u))
        .filter(|&u| {
            !cfg.exclude_near_infrastructure || infra.iter().all(|&i| !grid.are_neighbors(u, i))
        })
        .collect();
    if eligible.len() < count {
        return Err(invalid(format!(
            "{count} attackers requested but only {} eligible nodes",
            eligible.len()
        )));
    }
    eligible.shuffle(rng);
    let mut chosen = eligible[..count].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// One FDFF round: a fresh flow id for every benign neighbour of `attacker`.
pub fn apply_fdff(
    attacker: NodeId,
    grid: &Grid,
    attackers: &BTreeSet<NodeId>,
    next_flow: &mut u64,
) -> Vec<(NodeId, u64)> {
    grid.neighbors(attacker)
        .iter()
        .filter(|v| !attackers.contains(v))
        .map(|&v| {
            let id = *next_flow;
            *next_flow += 1;
            (v, id)
        })
        .collect()
}

/// Rewrites a relayed neighbour report. Returns `None` when the attacker
/// lets it through untouched.
pub fn apply_fni<R: Rng + ?Sized>(
    origin: NodeId,
    grid: &Grid,
    rewrite_prob: f64,
    fake_count: usize,
    rng: &mut R,
) -> Option<Vec<NodeId>> {
    if fake_count == 0 || !rng.random_bool(rewrite_prob) {
        return None;
    }
    let candidates: Vec<NodeId> =
        (0..grid.len()).filter(|&v| v != origin && !grid.are_neighbors(origin, v)).collect();
    let mut fake: Vec<NodeId> = candidates.choose_multiple(rng, fake_count).copied().collect();
    fake.sort_unstable();
    Some(fake)
}
