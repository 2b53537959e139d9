//! Bipartite multigraphs from the irregular cuckoo hashing model and the
//! configuration model.
//!
//! Storage is a flat edge array with per-user offsets. A user's slice is in
//! sampling order, which doubles as the online arrival order.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::degree_dist::DegreeDistribution;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("degree sums differ: users {users}, ads {ads}")]
    DegreeSumMismatch { users: usize, ads: usize },
    #[error("ad index {index} out of range for {n_ads} ads")]
    AdOutOfRange { index: usize, n_ads: usize },
    #[error("graph needs at least one ad")]
    NoAds,
    #[error("too many ads for 32-bit indices: {0}")]
    TooManyAds(usize),
    #[error("pairing is not a permutation of {0} points")]
    BadPairing(usize),
    #[error("malformed graph dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Cuckoo,
    ConfigModel,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMultigraph {
    n_users: usize,
    n_ads: usize,
    offsets: Vec<usize>,
    edges: Vec<u32>,
    origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    pub user_degrees: Vec<usize>,
    pub ad_degrees: Vec<usize>,
}

/// Ad-side adjacency (CSR) built on demand from a user-side graph.
#[derive(Debug, Clone)]
pub struct AdIndex {
    offsets: Vec<usize>,
    users: Vec<u32>,
}

impl AdIndex {
    pub fn neighbors(&self, ad: usize) -> &[u32] {
        &self.users[self.offsets[ad]..self.offsets[ad + 1]]
    }

    pub fn degree(&self, ad: usize) -> usize {
        self.offsets[ad + 1] - self.offsets[ad]
    }
}

impl BipartiteMultigraph {
    /// Builds a graph from per-user ad lists.
    pub fn from_adjacency<I, A>(n_ads: usize, adjacency: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = A>,
        A: AsRef<[usize]>,
    {
        if n_ads > u32::MAX as usize {
            return Err(GraphError::TooManyAds(n_ads));
        }
        let mut offsets = vec![0];
        let mut edges = Vec::new();
        for list in adjacency {
            for &a in list.as_ref() {
                if a >= n_ads {
                    return Err(GraphError::AdOutOfRange { index: a, n_ads });
                }
                edges.push(a as u32);
            }
            offsets.push(edges.len());
        }
        Ok(Self {
            n_users: offsets.len() - 1,
            n_ads,
            offsets,
            edges,
            origin: Origin::Explicit,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_ads(&self) -> usize {
        self.n_ads
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, user: usize) -> &[u32] {
        &self.edges[self.offsets[user]..self.offsets[user + 1]]
    }

    pub fn user_degree(&self, user: usize) -> usize {
        self.offsets[user + 1] - self.offsets[user]
    }

    pub fn ad_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n_ads];
        for &a in &self.edges {
            deg[a as usize] += 1;
        }
        deg
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence {
            user_degrees: (0..self.n_users).map(|u| self.user_degree(u)).collect(),
            ad_degrees: self.ad_degrees(),
        }
    }

    pub fn has_edge(&self, user: usize, ad: usize) -> bool {
        user < self.n_users && self.neighbors(user).iter().any(|&a| a as usize == ad)
    }

    /// Number of users whose ad list contains a repeated ad.
    pub fn users_with_parallel_edges(&self) -> usize {
        let mut stamp = vec![usize::MAX; self.n_ads];
        (0..self.n_users)
            .filter(|&u| {
                self.neighbors(u).iter().any(|&a| {
                    let seen = stamp[a as usize] == u;
                    stamp[a as usize] = u;
                    seen
                })
            })
            .count()
    }

    /// Replaces every user's multiset of ads by its support, keeping the
    /// first occurrence of each ad.
    pub fn simplify(&self) -> Self {
        let mut stamp = vec![usize::MAX; self.n_ads];
        let mut offsets = Vec::with_capacity(self.offsets.len());
        let mut edges = Vec::with_capacity(self.edges.len());
        offsets.push(0);
        for u in 0..self.n_users {
            for &a in self.neighbors(u) {
                if stamp[a as usize] != u {
                    stamp[a as usize] = u;
                    edges.push(a);
                }
            }
            offsets.push(edges.len());
        }
        Self {
            n_users: self.n_users,
            n_ads: self.n_ads,
            offsets,
            edges,
            origin: self.origin,
        }
    }

    pub fn ad_index(&self) -> AdIndex {
        let mut offsets = vec![0usize; self.n_ads + 1];
        for &a in &self.edges {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..self.n_ads {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut users = vec![0u32; self.edges.len()];
        for u in 0..self.n_users {
            for &a in self.neighbors(u) {
                users[fill[a as usize]] = u as u32;
                fill[a as usize] += 1;
            }
        }
        AdIndex { offsets, users }
    }

    /// Keeps only the listed users' and ads' complement: every edge touching
    /// a removed user or a removed ad is dropped. Vertex counts are unchanged.
    pub fn without_vertices(&self, users: &[bool], ads: &[bool]) -> Self {
        let adjacency: Vec<Vec<usize>> = (0..self.n_users)
            .map(|u| {
                if users[u] {
                    Vec::new()
                } else {
                    self.neighbors(u)
                        .iter()
                        .map(|&a| a as usize)
                        .filter(|&a| !ads[a])
                        .collect()
                }
            })
            .collect();
        let mut g = Self::from_adjacency(self.n_ads, adjacency).expect("indices already valid");
        g.origin = self.origin;
        g
    }

    /// `(user side degree -> count, ad side degree -> count)`.
    pub fn degree_histogram(&self) -> (BTreeMap<usize, usize>, BTreeMap<usize, usize>) {
        let mut users = BTreeMap::new();
        for u in 0..self.n_users {
            *users.entry(self.user_degree(u)).or_insert(0) += 1;
        }
        let mut ads = BTreeMap::new();
        for d in self.ad_degrees() {
            *ads.entry(d).or_insert(0) += 1;
        }
        (users, ads)
    }

    /// Debug dump: `n_users n_ads`, then one line of ad indices per user.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.n_users, self.n_ads)?;
        for u in 0..self.n_users {
            let line: Vec<String> = self.neighbors(u).iter().map(|a| a.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Self, GraphError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Dump("missing header".into()))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| GraphError::Dump(format!("bad header `{header}`"))))
            .collect::<Result<_, _>>()?;
        let [n_users, n_ads] = dims[..] else {
            return Err(GraphError::Dump(format!("bad header `{header}`")));
        };
        let mut adjacency = Vec::with_capacity(n_users);
        for _ in 0..n_users {
            let line = lines
                .next()
                .ok_or_else(|| GraphError::Dump("truncated user list".into()))??;
            let list: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| GraphError::Dump(format!("bad ad index `{t}`"))))
                .collect::<Result<_, _>>()?;
            adjacency.push(list);
        }
        Self::from_adjacency(n_ads, adjacency)
    }
}

/// Irregular cuckoo hashing: i.i.d. degrees from `dist`, each incident ad
/// uniform with replacement. Degrees are clamped to `dist`'s cap, or to
/// `n_ads` when no cap is set.
pub fn sample_cuckoo<R: Rng + ?Sized>(
    n_users: usize,
    n_ads: usize,
    dist: &DegreeDistribution,
    rng: &mut R,
) -> Result<BipartiteMultigraph, GraphError> {
    if n_ads == 0 {
        return Err(GraphError::NoAds);
    }
    if n_ads > u32::MAX as usize {
        return Err(GraphError::TooManyAds(n_ads));
    }
    let mut offsets = Vec::with_capacity(n_users + 1);
    offsets.push(0);
    let mut edges = Vec::new();
    for _ in 0..n_users {
        let d = dist.sample_degree(rng, n_ads);
        edges.extend((0..d).map(|_| rng.gen_range(0..n_ads as u32)));
        offsets.push(edges.len());
    }
    Ok(BipartiteMultigraph {
        n_users,
        n_ads,
        offsets,
        edges,
        origin: Origin::Cuckoo,
    })
}

/// Configuration-model graph for a given assignment of ad points to user
/// points: user point `k` (users' points listed in index order) is paired
/// with the `pairing[k]`-th ad point (ads' points listed in index order).
pub fn config_model_from_pairing(
    seq: &DegreeSequence,
    pairing: &[usize],
) -> Result<BipartiteMultigraph, GraphError> {
    let ad_points = ad_points(seq)?;
    let total = ad_points.len();
    if pairing.len() != total {
        return Err(GraphError::BadPairing(total));
    }
    let mut seen = vec![false; total];
    for &p in pairing {
        if p >= total || std::mem::replace(&mut seen[p], true) {
            return Err(GraphError::BadPairing(total));
        }
    }
    let paired: Vec<u32> = pairing.iter().map(|&p| ad_points[p]).collect();
    Ok(from_user_points(seq, paired))
}

/// Uniform random pairing of configuration points.
pub fn sample_config_model<R: Rng + ?Sized>(
    seq: &DegreeSequence,
    rng: &mut R,
) -> Result<BipartiteMultigraph, GraphError> {
    let mut points = ad_points(seq)?;
    points.shuffle(rng);
    Ok(from_user_points(seq, points))
}

fn ad_points(seq: &DegreeSequence) -> Result<Vec<u32>, GraphError> {
    let users: usize = seq.user_degrees.iter().sum();
    let ads: usize = seq.ad_degrees.iter().sum();
    if users != ads {
        return Err(GraphError::DegreeSumMismatch { users, ads });
    }
    if seq.ad_degrees.len() > u32::MAX as usize {
        return Err(GraphError::TooManyAds(seq.ad_degrees.len()));
    }
    let mut points = Vec::with_capacity(ads);
    for (a, &d) in seq.ad_degrees.iter().enumerate() {
        points.extend(std::iter::repeat_n(a as u32, d));
    }
    Ok(points)
}

fn from_user_points(seq: &DegreeSequence, edges: Vec<u32>) -> BipartiteMultigraph {
    let mut offsets = Vec::with_capacity(seq.user_degrees.len() + 1);
    offsets.push(0);
    let mut acc = 0;
    for &d in &seq.user_degrees {
        acc += d;
        offsets.push(acc);
    }
    BipartiteMultigraph {
        n_users: seq.user_degrees.len(),
        n_ads: seq.ad_degrees.len(),
        offsets,
        edges,
        origin: Origin::ConfigModel,
    }
}
