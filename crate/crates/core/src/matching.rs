//! Online greedy, RANKING, the first phase of Karp-Sipser, Hopcroft-Karp,
//! and an exhaustive maximum-matching oracle for tiny graphs.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph_gen::BipartiteMultigraph;

/// Largest side size accepted by [`brute_force_max`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

const NIL: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("instance too large for exhaustive search: {n_users} users, {n_ads} ads (limit {BRUTE_FORCE_LIMIT})")]
    TooLarge { n_users: usize, n_ads: usize },
    #[error("user {0} matched twice")]
    DuplicateUser(usize),
    #[error("ad {0} matched twice")]
    DuplicateAd(usize),
    #[error("pair ({0}, {1}) is not an edge")]
    NotAnEdge(usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    pairs: Vec<(u32, u32)>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: Vec<(u32, u32)>) -> Self {
        Self { pairs }
    }

    pub fn push(&mut self, user: usize, ad: usize) {
        self.pairs.push((user as u32, ad as u32));
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Disjointness and edge membership against `g`.
    pub fn validate(&self, g: &BipartiteMultigraph) -> Result<(), MatchingError> {
        let mut user_used = vec![false; g.n_users()];
        let mut ad_used = vec![false; g.n_ads()];
        for &(u, a) in &self.pairs {
            let (u, a) = (u as usize, a as usize);
            if !g.has_edge(u, a) {
                return Err(MatchingError::NotAnEdge(u, a));
            }
            if std::mem::replace(&mut user_used[u], true) {
                return Err(MatchingError::DuplicateUser(u));
            }
            if std::mem::replace(&mut ad_used[a], true) {
                return Err(MatchingError::DuplicateAd(a));
            }
        }
        Ok(())
    }
}

/// Each arriving user takes an unmatched ad chosen uniformly among the
/// distinct unmatched ads in its list, if there is one.
pub fn greedy_online<R: Rng + ?Sized>(g: &BipartiteMultigraph, rng: &mut R) -> Matching {
    let mut ad_matched = vec![false; g.n_ads()];
    let mut stamp = vec![u32::MAX; g.n_ads()];
    let mut candidates: Vec<u32> = Vec::new();
    let mut m = Matching::new();
    for u in 0..g.n_users() {
        candidates.clear();
        for &a in g.neighbors(u) {
            let ai = a as usize;
            if !ad_matched[ai] && stamp[ai] != u as u32 {
                stamp[ai] = u as u32;
                candidates.push(a);
            }
        }
        if let Some(&a) = candidates.choose(rng) {
            ad_matched[a as usize] = true;
            m.push(u, a as usize);
        }
    }
    m
}

/// RANKING with one uniformly random priority order over the ads.
pub fn ranking<R: Rng + ?Sized>(g: &BipartiteMultigraph, rng: &mut R) -> Matching {
    let mut order: Vec<u32> = (0..g.n_ads() as u32).collect();
    order.shuffle(rng);
    let mut rank = vec![0u32; g.n_ads()];
    for (pos, &a) in order.iter().enumerate() {
        rank[a as usize] = pos as u32;
    }
    ranking_with_ranks(g, &rank)
}

/// RANKING for a fixed priority: `rank[a]` is ad `a`'s position (lower wins).
pub fn ranking_with_ranks(g: &BipartiteMultigraph, rank: &[u32]) -> Matching {
    assert_eq!(rank.len(), g.n_ads(), "one rank per ad");
    let mut ad_matched = vec![false; g.n_ads()];
    let mut m = Matching::new();
    for u in 0..g.n_users() {
        let best = g
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&a| !ad_matched[a as usize])
            .min_by_key(|&a| rank[a as usize]);
        if let Some(a) = best {
            ad_matched[a as usize] = true;
            m.push(u, a as usize);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KarpSipserOutcome {
    pub partial: Matching,
    /// Unmatched users left with no live neighbor.
    pub isolated_users: usize,
    /// Unmatched ads left with no live neighbor.
    pub isolated_ads: usize,
    pub rounds: usize,
    pub n_users: usize,
    pub n_ads: usize,
}

impl KarpSipserOutcome {
    /// No matching of the input can exceed this.
    pub fn upper_bound(&self) -> usize {
        (self.n_users - self.isolated_users).min(self.n_ads - self.isolated_ads)
    }
}

/// First phase of Karp-Sipser on the simplified graph, in rounds: every
/// vertex of degree 1 at the start of a round is processed (users before
/// ads, each side in index order) before any vertex that reaches degree 1
/// during the round.
pub fn karp_sipser_phase1(g: &BipartiteMultigraph) -> KarpSipserOutcome {
    let s = g.simplify();
    let ads = s.ad_index();
    let nu = s.n_users();
    let na = s.n_ads();
    // Vertices 0..nu are users, nu..nu+na are ads.
    let mut deg: Vec<u32> = (0..nu)
        .map(|u| s.user_degree(u) as u32)
        .chain((0..na).map(|a| ads.degree(a) as u32))
        .collect();
    let mut alive = vec![true; nu + na];
    let mut partial = Matching::new();

    let live_neighbors = |v: usize| -> Box<dyn Iterator<Item = usize> + '_> {
        if v < nu {
            Box::new(s.neighbors(v).iter().map(move |&a| nu + a as usize))
        } else {
            Box::new(ads.neighbors(v - nu).iter().map(|&u| u as usize))
        }
    };

    let mut current: Vec<usize> = (0..nu + na).filter(|&v| deg[v] == 1).collect();
    let mut rounds = 0;
    while !current.is_empty() {
        rounds += 1;
        let mut next = Vec::new();
        for &v in &current {
            if !alive[v] || deg[v] == 0 {
                continue;
            }
            let w = live_neighbors(v)
                .find(|&w| alive[w])
                .expect("degree-1 vertex has a live neighbor");
            let (user, ad) = if v < nu { (v, w - nu) } else { (w, v - nu) };
            partial.push(user, ad);
            for x in [v, w] {
                alive[x] = false;
            }
            for x in [v, w] {
                for y in live_neighbors(x) {
                    if alive[y] {
                        deg[y] -= 1;
                        if deg[y] == 1 {
                            next.push(y);
                        }
                    }
                }
            }
        }
        next.retain(|&v| alive[v] && deg[v] == 1);
        next.sort_unstable();
        next.dedup();
        current = next;
    }

    let isolated_users = (0..nu).filter(|&v| alive[v] && deg[v] == 0).count();
    let isolated_ads = (nu..nu + na).filter(|&v| alive[v] && deg[v] == 0).count();
    KarpSipserOutcome {
        partial,
        isolated_users,
        isolated_ads,
        rounds,
        n_users: nu,
        n_ads: na,
    }
}

/// The simplified graph with every vertex covered by `partial` removed.
pub fn residual_graph(g: &BipartiteMultigraph, partial: &Matching) -> BipartiteMultigraph {
    let mut users = vec![false; g.n_users()];
    let mut ads = vec![false; g.n_ads()];
    for &(u, a) in partial.pairs() {
        users[u as usize] = true;
        ads[a as usize] = true;
    }
    g.simplify().without_vertices(&users, &ads)
}

/// Maximum-cardinality matching of the simplified graph.
pub fn hopcroft_karp(g: &BipartiteMultigraph) -> Matching {
    let s = g.simplify();
    let nu = s.n_users();
    let mut pair_u = vec![NIL; nu];
    let mut pair_a = vec![NIL; s.n_ads()];
    let mut dist = vec![u32::MAX; nu];
    let mut next_edge = vec![0usize; nu];
    let mut queue = Vec::with_capacity(nu);
    let mut stack: Vec<usize> = Vec::new();
    let mut via: Vec<u32> = Vec::new();

    // Cheap greedy start.
    for (u, slot) in pair_u.iter_mut().enumerate() {
        if let Some(&a) = s.neighbors(u).iter().find(|&&a| pair_a[a as usize] == NIL) {
            *slot = a;
            pair_a[a as usize] = u as u32;
        }
    }

    loop {
        queue.clear();
        for u in 0..nu {
            if pair_u[u] == NIL {
                dist[u] = 0;
                queue.push(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &a in s.neighbors(u) {
                let w = pair_a[a as usize];
                if w == NIL {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push(w as usize);
                }
            }
        }
        if !found {
            break;
        }

        next_edge.iter_mut().for_each(|e| *e = 0);
        let mut augmented = 0;
        for root in 0..nu {
            if pair_u[root] != NIL {
                continue;
            }
            stack.clear();
            via.clear();
            stack.push(root);
            while let Some(&u) = stack.last() {
                let adj = s.neighbors(u);
                if next_edge[u] < adj.len() {
                    let a = adj[next_edge[u]];
                    next_edge[u] += 1;
                    let w = pair_a[a as usize];
                    if w == NIL {
                        via.push(a);
                        for (&x, &b) in stack.iter().zip(&via) {
                            pair_u[x] = b;
                            pair_a[b as usize] = x as u32;
                        }
                        augmented += 1;
                        break;
                    } else if dist[w as usize] == dist[u].wrapping_add(1) {
                        via.push(a);
                        stack.push(w as usize);
                    }
                } else {
                    dist[u] = u32::MAX;
                    stack.pop();
                    via.pop();
                }
            }
        }
        if augmented == 0 {
            break;
        }
    }

    let mut m = Matching::new();
    for (u, &a) in pair_u.iter().enumerate() {
        if a != NIL {
            m.push(u, a as usize);
        }
    }
    m
}

/// Exact maximum matching size by dynamic programming over subsets of ads.
pub fn brute_force_max(g: &BipartiteMultigraph) -> Result<usize, MatchingError> {
    if g.n_users() > BRUTE_FORCE_LIMIT || g.n_ads() > BRUTE_FORCE_LIMIT {
        return Err(MatchingError::TooLarge {
            n_users: g.n_users(),
            n_ads: g.n_ads(),
        });
    }
    let masks = 1usize << g.n_ads();
    let mut reachable = vec![false; masks];
    reachable[0] = true;
    for u in 0..g.n_users() {
        let mut next = reachable.clone();
        for mask in (0..masks).filter(|&m| reachable[m]) {
            for &a in g.neighbors(u) {
                let bit = 1usize << a;
                if mask & bit == 0 {
                    next[mask | bit] = true;
                }
            }
        }
        reachable = next;
    }
    Ok((0..masks)
        .filter(|&m| reachable[m])
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0))
}
