use std::io::Write;

use serde::Serialize;

use super::AgentId;
use crate::error::{Error, Result};

/// One undirected layer stored as compressed adjacency rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layer {
    offsets: Vec<u32>,
    targets: Vec<AgentId>,
}

impl Layer {
    /// Build a symmetric layer from undirected edges. Self loops and duplicate
    /// edges are dropped; rows are sorted.
    pub fn from_edges(n: usize, edges: &[(AgentId, AgentId)]) -> Self {
        let mut degree = vec![0u32; n];
        for &(a, b) in edges {
            if a != b {
                degree[a as usize] += 1;
                degree[b as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0; *offsets.last().unwrap() as usize];
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            targets[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        // sort and dedup each row, then compact
        let mut out_offsets = Vec::with_capacity(n + 1);
        let mut out_targets = Vec::with_capacity(targets.len());
        out_offsets.push(0u32);
        for i in 0..n {
            let row = &mut targets[offsets[i] as usize..offsets[i + 1] as usize];
            row.sort_unstable();
            let mut last = None;
            for &t in row.iter() {
                if last != Some(t) {
                    out_targets.push(t);
                    last = Some(t);
                }
            }
            out_offsets.push(out_targets.len() as u32);
        }
        Layer {
            offsets: out_offsets,
            targets: out_targets,
        }
    }

    /// Build from groups whose members are all pairwise linked.
    pub fn from_cliques<'a>(n: usize, groups: impl IntoIterator<Item = &'a [AgentId]>) -> Self {
        let mut edges = Vec::new();
        for g in groups {
            for (i, &a) in g.iter().enumerate() {
                for &b in &g[i + 1..] {
                    edges.push((a, b));
                }
            }
        }
        Layer::from_edges(n, &edges)
    }

    pub fn empty(n: usize) -> Self {
        Layer {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    #[inline]
    pub fn neighbors(&self, id: AgentId) -> &[AgentId] {
        let i = id as usize;
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, id: AgentId) -> usize {
        let i = id as usize;
        (self.offsets[i + 1] - self.offsets[i]) as usize
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Undirected edges with `a < b`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        (0..self.len() as AgentId).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .filter(move |&&b| a < b)
                .map(move |&b| (a, b))
        })
    }

    /// Full scan: `j in row(i)` iff `i in row(j)`.
    pub fn is_symmetric(&self) -> bool {
        (0..self.len() as AgentId).all(|a| {
            self.neighbors(a)
                .iter()
                .all(|&b| self.neighbors(b).binary_search(&a).is_ok())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkLayer {
    Household,
    Relatives,
    CloseColleagues,
    SiteColleagues,
    Classmates,
    Friendship,
}

impl NetworkLayer {
    pub const ALL: [NetworkLayer; 6] = [
        NetworkLayer::Household,
        NetworkLayer::Relatives,
        NetworkLayer::CloseColleagues,
        NetworkLayer::SiteColleagues,
        NetworkLayer::Classmates,
        NetworkLayer::Friendship,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NetworkLayer::Household => "household",
            NetworkLayer::Relatives => "relatives",
            NetworkLayer::CloseColleagues => "close_colleague",
            NetworkLayer::SiteColleagues => "site_colleague",
            NetworkLayer::Classmates => "classmate",
            NetworkLayer::Friendship => "friendship",
        }
    }
}

/// The multi-layer social network. Site colleagues are stored as site
/// membership lists; every other layer is an explicit adjacency structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialNetwork {
    pub household: Layer,
    pub relatives: Layer,
    pub close_colleagues: Layer,
    pub classmates: Layer,
    pub friendship: Layer,
    pub sites: Vec<Vec<AgentId>>,
}

impl SocialNetwork {
    pub fn layer(&self, layer: NetworkLayer) -> Option<&Layer> {
        match layer {
            NetworkLayer::Household => Some(&self.household),
            NetworkLayer::Relatives => Some(&self.relatives),
            NetworkLayer::CloseColleagues => Some(&self.close_colleagues),
            NetworkLayer::Classmates => Some(&self.classmates),
            NetworkLayer::Friendship => Some(&self.friendship),
            NetworkLayer::SiteColleagues => None,
        }
    }

    pub fn all_layers_symmetric(&self) -> bool {
        NetworkLayer::ALL
            .iter()
            .filter_map(|&l| self.layer(l))
            .all(Layer::is_symmetric)
    }

    /// Write the network as an edge-list CSV with columns
    /// `layer,agent_a,agent_b` (`agent_a < agent_b`).
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["layer", "agent_a", "agent_b"])?;
        for layer in NetworkLayer::ALL {
            match self.layer(layer) {
                Some(l) => {
                    for (a, b) in l.edges() {
                        w.write_record([layer.name(), &a.to_string(), &b.to_string()])?;
                    }
                }
                None => {
                    for site in &self.sites {
                        let mut members = site.clone();
                        members.sort_unstable();
                        for (i, &a) in members.iter().enumerate() {
                            for &b in &members[i + 1..] {
                                w.write_record([layer.name(), &a.to_string(), &b.to_string()])?;
                            }
                        }
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io("<edge list>", e))?;
        Ok(())
    }
}
