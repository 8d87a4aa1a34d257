//! Maximum spanning arborescence decoding (Chu–Liu/Edmonds).

/// Arc scores for a sentence of `n` tokens. Entry `(h, d)` is the score of
/// attaching dependent `d` (1-based) to head `h` (0 is the artificial
/// root). Diagonal entries (`h == d`) are never read.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    n: usize,
    scores: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(n: usize) -> Self {
        ScoreMatrix {
            n,
            scores: vec![0.0; (n + 1) * (n + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, head: usize, dep: usize) -> f64 {
        self.scores[head * (self.n + 1) + dep]
    }

    pub fn set(&mut self, head: usize, dep: usize, score: f64) {
        self.scores[head * (self.n + 1) + dep] = score;
    }

    /// Total score of a head assignment (`heads[i]` is the head of token
    /// `i+1`), summed in token order.
    pub fn total(&self, heads: &[usize]) -> f64 {
        heads
            .iter()
            .enumerate()
            .map(|(i, &h)| self.get(h, i + 1))
            .sum()
    }
}

/// Decode the maximum-total-score arborescence rooted at node 0.
///
/// Ties are broken by preferring the smaller head index, then the shorter
/// arc. The root may end up with several children; single-rootedness is a
/// parsing concern handled downstream.
pub fn mst_decode(matrix: &ScoreMatrix) -> Vec<usize> {
    let n = matrix.n;
    if n == 0 {
        return Vec::new();
    }
    // Working copy over vertices 0..=n; vertex 0 is the root.
    let mut scores = vec![f64::NEG_INFINITY; (n + 1) * (n + 1)];
    for h in 0..=n {
        for d in 1..=n {
            if h != d {
                scores[h * (n + 1) + d] = matrix.get(h, d);
            }
        }
    }
    let mut active = vec![true; n + 1];
    let parents = contract(&mut scores, n + 1, &mut active);
    (1..=n).map(|d| parents[d].expect("non-root vertex has a parent")).collect()
}

fn better(score: f64, head: usize, dep: usize, best: f64, best_head: usize) -> bool {
    if score != best {
        return score > best;
    }
    if head != best_head {
        return head < best_head;
    }
    head.abs_diff(dep) < best_head.abs_diff(dep)
}

fn contract(scores: &mut [f64], size: usize, active: &mut [bool]) -> Vec<Option<usize>> {
    // Best incoming edge per active non-root vertex.
    let mut parents: Vec<Option<usize>> = vec![None; size];
    for d in 1..size {
        if !active[d] {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_head = usize::MAX;
        for h in 0..size {
            if h == d || !active[h] {
                continue;
            }
            let s = scores[h * size + d];
            if s > f64::NEG_INFINITY && better(s, h, d, best, best_head) {
                best = s;
                best_head = h;
            }
        }
        if best_head != usize::MAX {
            parents[d] = Some(best_head);
        }
    }

    let cycle = match find_cycle(&parents, active) {
        Some(c) => c,
        None => return parents,
    };

    // Contract the cycle into its first vertex.
    let rep = cycle[0];
    let cycle_sum: f64 = cycle
        .iter()
        .map(|&v| scores[parents[v].unwrap() * size + v])
        .sum();
    for &v in &cycle[1..] {
        active[v] = false;
    }

    let mut incoming_via: Vec<(usize, usize)> = Vec::new(); // (outside head, cycle vertex)
    let mut outgoing_via: Vec<(usize, usize)> = Vec::new(); // (outside dep, cycle vertex)
    for u in 0..size {
        if !active[u] || cycle.contains(&u) {
            continue;
        }
        // Incoming (u -> cycle): keep the variant that maximizes the total
        // after breaking the cycle at the entered vertex.
        if u != rep {
            let mut best = f64::NEG_INFINITY;
            let mut best_c = usize::MAX;
            for &c in &cycle {
                let direct = scores[u * size + c];
                if direct == f64::NEG_INFINITY {
                    continue;
                }
                let broken = scores[parents[c].unwrap() * size + c];
                let s = cycle_sum + direct - broken;
                if s > best {
                    best = s;
                    best_c = c;
                }
            }
            scores[u * size + rep] = best;
            if best_c != usize::MAX {
                incoming_via.push((u, best_c));
            }
        }
        // Outgoing (cycle -> u): best cycle vertex as the real head.
        let mut best = f64::NEG_INFINITY;
        let mut best_c = usize::MAX;
        for &c in &cycle {
            let s = scores[c * size + u];
            if s > best || (s == best && best_c != usize::MAX && c < best_c) {
                best = s;
                best_c = c;
            }
        }
        scores[rep * size + u] = best;
        if best_c != usize::MAX {
            outgoing_via.push((u, best_c));
        }
    }

    let contracted = contract(scores, size, active);

    // Expand: the head chosen for the representative enters the cycle at
    // some vertex, which loses its cycle edge; other cycle vertices keep
    // theirs. Outgoing edges from the representative fall back to their
    // real cycle-vertex head.
    let mut result = contracted;
    let outer_head = result[rep].expect("contracted vertex has a head");
    let entered = incoming_via
        .iter()
        .find(|(u, _)| *u == outer_head)
        .map(|(_, c)| *c)
        .expect("incoming replacement recorded for chosen head");
    for &v in &cycle {
        active[v] = true;
        if v == entered {
            result[v] = Some(outer_head);
        } else {
            result[v] = parents[v];
        }
    }
    for (u, c) in outgoing_via {
        if result[u] == Some(rep) && c != rep {
            result[u] = Some(c);
        }
    }
    result
}

fn find_cycle(parents: &[Option<usize>], active: &[bool]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on path, 2 done
    for start in 0..n {
        if !active[start] || state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if state[cur] == 1 {
                let pos = path.iter().position(|&x| x == cur).unwrap();
                return Some(path[pos..].to_vec());
            }
            if state[cur] == 2 {
                break;
            }
            state[cur] = 1;
            path.push(cur);
            match parents[cur] {
                Some(p) => cur = p,
                None => break,
            }
        }
        for &p in &path {
            state[p] = 2;
        }
    }
    None
}
