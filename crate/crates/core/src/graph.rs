//! Plain directed graphs over dense vertex ids, used for path, cycle and SCC search.

use crate::region::Region;

/// Adjacency lists over `0..n`; only vertices in `vertices` are live.
#[derive(Clone, Debug)]
pub struct Graph {
    pub vertices: Region,
    pub succ: Vec<Vec<usize>>,
}

impl Graph {
    /// Successor lists are sorted and deduplicated; edges leaving `vertices` are dropped.
    pub fn new(vertices: Region, mut succ: Vec<Vec<usize>>) -> Self {
        for (v, out) in succ.iter_mut().enumerate() {
            if !vertices.contains(v) {
                out.clear();
                continue;
            }
            out.retain(|&w| vertices.contains(w));
            out.sort_unstable();
            out.dedup();
        }
        Graph { vertices, succ }
    }

    pub fn universe(&self) -> usize {
        self.succ.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertices
            .iter()
            .flat_map(move |v| self.succ[v].iter().map(move |&w| (v, w)))
    }

    pub fn has_edge(&self, v: usize, w: usize) -> bool {
        self.succ[v].binary_search(&w).is_ok()
    }

    /// Subgraph induced by `keep` (intersected with the live vertices).
    pub fn restrict(&self, keep: &Region) -> Graph {
        Graph::new(self.vertices.intersection(keep), self.succ.clone())
    }

    pub fn reachable_from(&self, start: usize) -> Region {
        let mut seen = Region::empty(self.universe());
        if !self.vertices.contains(start) {
            return seen;
        }
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(v) = stack.pop() {
            for &w in &self.succ[v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Vertices that can reach some vertex of `targets`.
    pub fn can_reach(&self, targets: &Region) -> Region {
        let n = self.universe();
        let mut pred = vec![Vec::new(); n];
        for (v, w) in self.edges() {
            pred[w].push(v);
        }
        let mut seen = targets.intersection(&self.vertices);
        let mut stack: Vec<usize> = seen.to_vec();
        while let Some(w) = stack.pop() {
            for &v in &pred[w] {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Shortest path from `from` to the nearest vertex of `targets`, ties broken by
    /// smallest vertex id. With `nonempty`, the path has at least one edge even when
    /// `from` is itself a target (used to close cycles).
    pub fn bfs_path(&self, from: usize, targets: &Region, nonempty: bool) -> Option<Vec<usize>> {
        if !self.vertices.contains(from) {
            return None;
        }
        if !nonempty && targets.contains(from) {
            return Some(vec![from]);
        }
        let n = self.universe();
        let mut parent = vec![usize::MAX; n];
        let mut seen = Region::empty(n);
        let mut frontier = vec![from];
        if !nonempty {
            seen.insert(from);
        }
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in &self.succ[v] {
                    if !seen.contains(w) {
                        seen.insert(w);
                        parent[w] = v;
                        next.push(w);
                    }
                }
            }
            let mut hits: Vec<usize> = next.iter().copied().filter(|&w| targets.contains(w)).collect();
            if !hits.is_empty() {
                hits.sort_unstable();
                let mut path = vec![hits[0]];
                let mut cur = hits[0];
                loop {
                    let p = parent[cur];
                    path.push(p);
                    if p == from {
                        break;
                    }
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            next.sort_unstable();
            frontier = next;
        }
        None
    }

    /// Strongly connected components (Tarjan, iterative), each sorted ascending.
    /// Components are listed in reverse topological order.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        tarjan(&self.vertices, &self.succ)
    }

    /// A component is nontrivial when it carries a cycle.
    pub fn is_nontrivial(&self, comp: &[usize]) -> bool {
        comp.len() > 1 || self.has_edge(comp[0], comp[0])
    }

    /// Nontrivial components reachable from `start`.
    pub fn reachable_cyclic_sccs(&self, start: usize) -> Vec<Vec<usize>> {
        let reach = self.reachable_from(start);
        let sub = self.restrict(&reach);
        sub.sccs().into_iter().filter(|c| sub.is_nontrivial(c)).collect()
    }

    /// A closed walk inside `comp` that starts at `start`, visits every vertex of
    /// `waypoints` in the given order and returns to the start. `comp` must be strongly
    /// connected and nontrivial. The returned walk repeats the start vertex at the end.
    pub fn thread_cycle(&self, comp: &Region, start: usize, waypoints: &[usize]) -> Vec<usize> {
        let sub = self.restrict(comp);
        let mut walk = vec![start];
        let mut cur = start;
        for &w in waypoints {
            if w == cur {
                continue;
            }
            let seg = sub
                .bfs_path(cur, &Region::from_ids(self.universe(), [w]), false)
                .expect("waypoint inside a strongly connected component");
            walk.extend_from_slice(&seg[1..]);
            cur = w;
        }
        let back = sub
            .bfs_path(cur, &Region::from_ids(self.universe(), [start]), true)
            .expect("component carries a cycle");
        walk.extend_from_slice(&back[1..]);
        walk
    }
}

/// Iterative Tarjan over the live vertices of an adjacency-list graph.
pub fn tarjan(live: &Region, succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in live.iter() {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if !live.contains(w) {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}
