//! 2-planar bracketing: linearize a dependency tree into per-token labels
//! over two non-crossing arc planes, and decode labels back into a tree.
//!
//! Bracket alphabet, per plane: an arc `(h, d)` with `h < d` writes `/` at
//! `h` and `>` at `d`; an arc with `h > d` writes `<` at `d` and `\` at
//! `h`. Root arcs are rightward arcs from a virtual position 0, so only
//! their `>` is visible. Within a token, brackets are written in the order
//! `<`, `\`, `/`, `>`.

use crate::conllu::Sentence;

/// `(head, dependent)` with positions `0..=n`; 0 is the virtual root.
pub type Arc = (usize, usize);

/// Per-token label: bracket strings for both planes plus the dependency
/// relation of the token's incoming arc.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenLabel {
    pub plane1: String,
    pub plane2: String,
    pub deprel: String,
}

/// A linearized sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSentence {
    pub labels: Vec<TokenLabel>,
    /// Gold arcs that fit neither plane and were left unencoded.
    pub dropped: Vec<Arc>,
}

/// Two arcs cross iff their endpoints strictly interleave.
pub fn arcs_cross(a: Arc, b: Arc) -> bool {
    let (l1, r1) = (a.0.min(a.1), a.0.max(a.1));
    let (l2, r2) = (b.0.min(b.1), b.0.max(b.1));
    (l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1)
}

/// Result of assigning arcs to planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneAssignment {
    pub plane1: Vec<Arc>,
    pub plane2: Vec<Arc>,
    pub dropped: Vec<Arc>,
}

/// Split arcs into two non-crossing planes.
///
/// Arcs are grouped into connected components of the crossing graph and
/// each bipartite component is 2-colored, seeded so that the root arc
/// (else the component's arc with the leftmost dependent) lands on plane
/// 1. Components whose crossing graph is not bipartite cannot be fully
/// encoded; those fall back to first-fit in left-to-right dependent order
/// and the arcs fitting neither plane are dropped. Arcs are therefore
/// dropped exactly when the crossing graph is not 2-colorable.
pub fn plane_assignment(arcs: &[Arc]) -> PlaneAssignment {
    let mut arcs: Vec<Arc> = arcs.to_vec();
    arcs.sort_by_key(|&(_, d)| d);
    let m = arcs.len();

    let mut adjacent = vec![Vec::new(); m];
    for i in 0..m {
        for j in i + 1..m {
            if arcs_cross(arcs[i], arcs[j]) {
                adjacent[i].push(j);
                adjacent[j].push(i);
            }
        }
    }

    // Connected components, in order of their smallest member index.
    let mut component = vec![usize::MAX; m];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..m {
        if component[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        component[start] = id;
        let mut queue = vec![start];
        while let Some(u) = queue.pop() {
            for &v in &adjacent[u] {
                if component[v] == usize::MAX {
                    component[v] = id;
                    members.push(v);
                    queue.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }

    let mut plane_of = vec![0u8; m]; // 1, 2, or 3 = dropped
    for members in &components {
        let seed = members
            .iter()
            .copied()
            .find(|&i| arcs[i].0 == 0)
            .unwrap_or(members[0]);
        if !two_color(&arcs, &adjacent, members, seed, &mut plane_of) {
            first_fit(&arcs, members, &mut plane_of);
        }
    }

    let mut out = PlaneAssignment {
        plane1: Vec::new(),
        plane2: Vec::new(),
        dropped: Vec::new(),
    };
    for (i, &arc) in arcs.iter().enumerate() {
        match plane_of[i] {
            1 => out.plane1.push(arc),
            2 => out.plane2.push(arc),
            _ => out.dropped.push(arc),
        }
    }
    out
}

fn two_color(
    arcs: &[Arc],
    adjacent: &[Vec<usize>],
    members: &[usize],
    seed: usize,
    plane_of: &mut [u8],
) -> bool {
    let mut color = std::collections::HashMap::new();
    color.insert(seed, 1u8);
    let mut queue = vec![seed];
    while let Some(u) = queue.pop() {
        let cu = color[&u];
        for &v in &adjacent[u] {
            match color.get(&v) {
                None => {
                    color.insert(v, 3 - cu);
                    queue.push(v);
                }
                Some(&cv) if cv == cu => return false,
                Some(_) => {}
            }
        }
    }
    debug_assert_eq!(color.len(), members.len());
    for &i in members {
        plane_of[i] = color[&i];
    }
    let _ = arcs;
    true
}

fn first_fit(arcs: &[Arc], members: &[usize], plane_of: &mut [u8]) {
    for &i in members {
        let fits = |plane: u8, plane_of: &[u8]| {
            members
                .iter()
                .take_while(|&&j| j < i)
                .all(|&j| plane_of[j] != plane || !arcs_cross(arcs[i], arcs[j]))
        };
        plane_of[i] = if fits(1, plane_of) {
            1
        } else if fits(2, plane_of) {
            2
        } else {
            3
        };
    }
}

/// Encode a sentence's tree as per-token bracket labels.
pub fn encode_2planar(sentence: &Sentence) -> EncodedSentence {
    let n = sentence.len();
    let arcs: Vec<Arc> = sentence.tokens.iter().map(|t| (t.head, t.id)).collect();
    let assignment = plane_assignment(&arcs);

    let mut planes: Vec<[Vec<char>; 2]> = vec![[Vec::new(), Vec::new()]; n + 1];
    for (p, plane_arcs) in [&assignment.plane1, &assignment.plane2].into_iter().enumerate() {
        for &(h, d) in plane_arcs {
            if h < d {
                if h > 0 {
                    planes[h][p].push('/');
                }
                planes[d][p].push('>');
            } else {
                planes[d][p].push('<');
                planes[h][p].push('\\');
            }
        }
    }

    let order = |c: char| match c {
        '<' => 0,
        '\\' => 1,
        '/' => 2,
        _ => 3,
    };
    let labels = sentence
        .tokens
        .iter()
        .map(|t| {
            let mut p1 = planes[t.id][0].clone();
            let mut p2 = planes[t.id][1].clone();
            p1.sort_by_key(|&c| order(c));
            p2.sort_by_key(|&c| order(c));
            TokenLabel {
                plane1: p1.into_iter().collect(),
                plane2: p2.into_iter().collect(),
                deprel: t.deprel.clone(),
            }
        })
        .collect();

    EncodedSentence {
        labels,
        dropped: assignment.dropped,
    }
}

/// Decode per-token labels into heads and deprels. Total: accepts any
/// label strings and always yields a tree that passes validation.
///
/// Per plane, a stack matches `/`...`>` (rightward) and `<`...`\`
/// (leftward); each plane's rightward stack starts with the virtual root
/// position 0 so a root arc's `>` resolves to head 0. Within a token,
/// closing brackets (`>`, `\`) act before opening ones (`<`, `/`).
/// Robustness: unmatched brackets are discarded, repeated head claims keep
/// the first, cycles are broken by re-attaching their smallest node to the
/// root, headless tokens attach to the root, and if several roots remain
/// the first explicitly decoded one (else the first) keeps the others as
/// children.
pub fn decode_2planar(labels: &[TokenLabel]) -> (Vec<usize>, Vec<String>) {
    let n = labels.len();
    let deprels: Vec<String> = labels.iter().map(|l| l.deprel.clone()).collect();
    if n == 0 {
        return (Vec::new(), deprels);
    }

    let mut heads: Vec<Option<usize>> = vec![None; n];
    let mut explicit_root = vec![false; n];
    let mut right_stack = [vec![0usize], vec![0usize]];
    let mut pending_left: [Vec<usize>; 2] = [Vec::new(), Vec::new()];

    let claim = |heads: &mut Vec<Option<usize>>,
                 explicit_root: &mut Vec<bool>,
                 dep: usize,
                 head: usize| {
        if heads[dep - 1].is_none() {
            heads[dep - 1] = Some(head);
            if head == 0 {
                explicit_root[dep - 1] = true;
            }
        }
    };

    for i in 1..=n {
        for (p, label) in [&labels[i - 1].plane1, &labels[i - 1].plane2]
            .into_iter()
            .enumerate()
        {
            for c in label.chars().filter(|&c| c == '>' || c == '\\') {
                match c {
                    '>' => {
                        if let Some(h) = right_stack[p].pop() {
                            claim(&mut heads, &mut explicit_root, i, h);
                        }
                    }
                    _ => {
                        if let Some(d) = pending_left[p].pop() {
                            claim(&mut heads, &mut explicit_root, d, i);
                        }
                    }
                }
            }
            for c in label.chars().filter(|&c| c == '<' || c == '/') {
                match c {
                    '<' => pending_left[p].push(i),
                    _ => right_stack[p].push(i),
                }
            }
        }
    }

    let mut heads: Vec<usize> = heads.into_iter().map(|h| h.unwrap_or(0)).collect();

    // Break any cycles introduced by ill-formed input.
    let mut state = vec![0u8; n + 1];
    for start in 1..=n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if cur == 0 || state[cur] == 2 {
                break;
            }
            if state[cur] == 1 {
                let pos = path.iter().position(|&x| x == cur).unwrap();
                let node = *path[pos..].iter().min().unwrap();
                heads[node - 1] = 0;
                explicit_root[node - 1] = false;
                break;
            }
            state[cur] = 1;
            path.push(cur);
            cur = heads[cur - 1];
        }
        for &p in &path {
            state[p] = 2;
        }
    }

    // Collapse multiple roots onto one.
    let roots: Vec<usize> = (1..=n).filter(|&i| heads[i - 1] == 0).collect();
    if roots.len() > 1 {
        let keeper = roots
            .iter()
            .copied()
            .find(|&r| explicit_root[r - 1])
            .unwrap_or(roots[0]);
        for r in roots {
            if r != keeper {
                heads[r - 1] = keeper;
            }
        }
    }

    (heads, deprels)
}
