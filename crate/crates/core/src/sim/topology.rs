use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::config::Neighborhood;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Plain,
    Attacker,
    Controller,
    DataSink,
    ManagementSink,
}

/// Square grid with the controller in a corner and both sinks next to it.
#[derive(Debug, Clone)]
pub struct Grid {
    side: usize,
    neighbors: Vec<Vec<NodeId>>,
    adjacency: Vec<Vec<bool>>,
    /// Path from each node to the controller along the control tree, both ends included.
    control_paths: Vec<Vec<NodeId>>,
}

pub const CONTROLLER: NodeId = 0;
pub const DATA_SINK: NodeId = 1;

impl Grid {
    pub fn new(side: usize, hood: Neighborhood) -> Self {
        let n = side * side;
        let mut neighbors = vec![Vec::new(); n];
        for (id, list) in neighbors.iter_mut().enumerate() {
            let (x, y) = ((id % side) as isize, (id / side) as isize);
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if (dx, dy) == (0, 0) {
                        continue;
                    }
                    if hood == Neighborhood::Four && dx != 0 && dy != 0 {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < side && (ny as usize) < side {
                        list.push(ny as usize * side + nx as usize);
                    }
                }
            }
            list.sort_unstable();
        }
        let mut adjacency = vec![vec![false; n]; n];
        for (u, list) in neighbors.iter().enumerate() {
            for &v in list {
                adjacency[u][v] = true;
            }
        }
        let parent = bfs_parents(&neighbors, CONTROLLER);
        let control_paths = (0..n)
            .map(|u| {
                let mut p = vec![u];
                let mut cur = u;
                while cur != CONTROLLER {
                    cur = parent[cur].expect("grid is connected");
                    p.push(cur);
                }
                p
            })
            .collect();
        Self { side, neighbors, adjacency, control_paths }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.side * self.side
    }

    pub fn is_empty(&self) -> bool {
        self.side == 0
    }

    pub fn management_sink(&self) -> NodeId {
        self.side
    }

    pub fn role_of_infrastructure(&self, id: NodeId) -> Option<Role> {
        match id {
            CONTROLLER => Some(Role::Controller),
            DATA_SINK => Some(Role::DataSink),
            x if x == self.management_sink() => Some(Role::ManagementSink),
            _ => None,
        }
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[u]
    }

    pub fn are_neighbors(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u][v]
    }

    pub fn control_path(&self, u: NodeId) -> &[NodeId] {
        &self.control_paths[u]
    }

    /// Hop count of the longest shortest path (4-connected: `2 (side - 1)`).
    pub fn diameter(&self) -> usize {
        (0..self.len())
            .map(|s| bfs_dist(&self.neighbors, s).into_iter().flatten().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

fn bfs_dist(adj: &[Vec<NodeId>], root: NodeId) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[root] = Some(0);
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        let d = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

fn bfs_parents(adj: &[Vec<NodeId>], root: NodeId) -> Vec<Option<NodeId>> {
    let mut parent = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[root] = true;
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                q.push_back(v);
            }
        }
    }
    parent
}

/// Next hop toward `dest` for every node of a directed view, where `view[u]`
/// lists the neighbours `u` claims. Ties go to the lowest id.
pub fn routes_toward(view: &[Vec<NodeId>], dest: NodeId) -> Vec<Option<NodeId>> {
    let n = view.len();
    let mut reverse = vec![Vec::new(); n];
    for (u, list) in view.iter().enumerate() {
        for &v in list {
            if v < n && v != u {
                reverse[v].push(u);
            }
        }
    }
    let dist = bfs_dist(&reverse, dest);
    (0..n)
        .map(|u| {
            if u == dest {
                return None;
            }
            let du = dist[u]?;
            view[u]
                .iter()
                .copied()
                .filter(|&v| v < n && dist[v] == Some(du - 1))
                .min()
        })
        .collect()
}
