//! Directed friendship networks.
//!
//! `F_i`, the friends of player `i`, are the out-neighbours of `i`. Friend
//! lists are kept sorted, which makes neighbourhoods, induced subnetworks and
//! file output deterministic.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone)]
pub struct DirectedNetwork {
    friends: Vec<Vec<usize>>,
    in_degree: OnceLock<Vec<usize>>,
}

impl PartialEq for DirectedNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.friends == other.friends
    }
}

impl Eq for DirectedNetwork {}

/// The players within `radius` friend-steps of `center`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub center: usize,
    pub radius: usize,
    pub members: Vec<usize>,
}

impl Neighborhood {
    pub fn contains(&self, player: usize) -> bool {
        self.members.binary_search(&player).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A network induced on a player subset, with the map back to original ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subnetwork {
    /// Induced graph on local indices `0..members.len()`.
    pub network: DirectedNetwork,
    /// `members[local]` is the original index of local player `local`.
    pub members: Vec<usize>,
    /// Local index of the centre player.
    pub center: usize,
}

impl DirectedNetwork {
    /// A network with `n` players and no friendships.
    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unchecked(vec![Vec::new(); n])
    }

    fn from_sorted_unchecked(friends: Vec<Vec<usize>>) -> Self {
        Self {
            friends,
            in_degree: OnceLock::new(),
        }
    }

    /// Builds a network from per-player friend lists, validating that there are
    /// no self-loops, duplicates or out-of-range entries. Lists are sorted.
    pub fn from_friend_lists(mut friends: Vec<Vec<usize>>) -> Result<Self> {
        let n = friends.len();
        for (i, list) in friends.iter_mut().enumerate() {
            list.sort_unstable();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidNetwork(format!("player {i} lists friend {} twice", w[0])));
                }
            }
            if let Some(&j) = list.iter().find(|&&j| j >= n) {
                return Err(Error::PlayerOutOfRange { index: j, n });
            }
            if list.binary_search(&i).is_ok() {
                return Err(Error::InvalidNetwork(format!("player {i} lists itself as a friend")));
            }
        }
        Ok(Self::from_sorted_unchecked(friends))
    }

    /// Builds a network from `(i, j)` pairs meaning `j` is a friend of `i`.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut friends = vec![Vec::new(); n];
        for (i, j) in edges {
            if i >= n {
                return Err(Error::PlayerOutOfRange { index: i, n });
            }
            friends[i].push(j);
        }
        Self::from_friend_lists(friends)
    }

    pub fn n(&self) -> usize {
        self.friends.len()
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::PlayerOutOfRange { index: i, n: self.n() })
        }
    }

    /// `F_i`, ascending.
    pub fn friends(&self, i: usize) -> Result<&[usize]> {
        self.check(i)?;
        Ok(&self.friends[i])
    }

    /// `Q_i = |F_i|`.
    pub fn num_friends(&self, i: usize) -> Result<usize> {
        self.friends(i).map(<[usize]>::len)
    }

    /// Unchecked friend list, for hot loops that already validated `i`.
    pub(crate) fn friends_of(&self, i: usize) -> &[usize] {
        &self.friends[i]
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        self.friends.iter().map(Vec::len).collect()
    }

    /// In-degrees, computed on first use.
    pub fn in_degrees(&self) -> &[usize] {
        self.in_degree.get_or_init(|| {
            let mut deg = vec![0; self.n()];
            for list in &self.friends {
                for &j in list {
                    deg[j] += 1;
                }
            }
            deg
        })
    }

    /// Network centrality: the number of players naming `i` as a friend.
    pub fn centrality(&self, i: usize) -> Result<usize> {
        self.check(i)?;
        Ok(self.in_degrees()[i])
    }

    pub fn edge_count(&self) -> usize {
        self.friends.iter().map(Vec::len).sum()
    }

    /// All `(i, j)` with `j` a friend of `i`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.friends
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().map(move |&j| (i, j)))
    }

    /// `N_(i,h)`: breadth-first search along friend edges up to depth `h`.
    pub fn neighborhood(&self, center: usize, radius: usize) -> Result<Neighborhood> {
        self.check(center)?;
        let mut seen = HashSet::from([center]);
        let mut frontier = vec![center];
        for _ in 0..radius {
            let mut next = Vec::new();
            for &j in &frontier {
                for &f in &self.friends[j] {
                    if seen.insert(f) {
                        next.push(f);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        let mut members: Vec<usize> = seen.into_iter().collect();
        members.sort_unstable();
        Ok(Neighborhood {
            center,
            radius,
            members,
        })
    }

    /// The network induced on `members` (ascending, distinct): each member
    /// keeps the friends that are also members.
    pub fn induced(&self, members: &[usize], center: usize) -> Result<Subnetwork> {
        let local: HashMap<usize, usize> = members.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        let Some(&center_local) = local.get(&center) else {
            return Err(Error::InvalidNetwork(format!("centre {center} is not a member")));
        };
        let mut lists = Vec::with_capacity(members.len());
        for &g in members {
            self.check(g)?;
            // friend lists are sorted and `members` is ascending, so local ids stay sorted
            lists.push(self.friends[g].iter().filter_map(|f| local.get(f).copied()).collect());
        }
        Ok(Subnetwork {
            network: Self::from_sorted_unchecked(lists),
            members: members.to_vec(),
            center: center_local,
        })
    }

    /// The subnetwork game graph around `center`: vertices `N_(i,h)`, and each
    /// member `j` keeps `F_j ∩ N_(i,h)`.
    pub fn subgraph(&self, center: usize, radius: usize) -> Result<Subnetwork> {
        let hood = self.neighborhood(center, radius)?;
        self.induced(&hood.members, center)
    }

    /// Relabels players: old player `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::Dimension(format!(
                "permutation of length {} for {n} players",
                perm.len()
            )));
        }
        let mut lists = vec![Vec::new(); n];
        let mut hit = vec![false; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || std::mem::replace(&mut hit[p], true) {
                return Err(Error::InvalidNetwork("relabelling is not a permutation".into()));
            }
            lists[p] = self.friends[i].iter().map(|&j| perm[j]).collect();
        }
        Self::from_friend_lists(lists)
    }

    /// Positions around the circle if this network is a circle.
    ///
    /// Returns `order` with `order[p]` the player at position `p`, moving
    /// rightwards. Player 0 sits at position 0 and its lower-indexed friend is
    /// its left neighbour, matching the [`generate_circle`] layout.
    pub fn circle_order(&self) -> Result<Vec<usize>> {
        let n = self.n();
        if n < 3 {
            return Err(Error::InvalidNetwork(format!(
                "a circle needs at least 3 players, got {n}"
            )));
        }
        for (i, list) in self.friends.iter().enumerate() {
            if list.len() != 2 {
                return Err(Error::InvalidNetwork(format!(
                    "not a circle: player {i} has {} friends",
                    list.len()
                )));
            }
            for &j in list {
                if self.friends[j].binary_search(&i).is_err() {
                    return Err(Error::InvalidNetwork(format!(
                        "not a circle: friendship {i} -> {j} is not mutual"
                    )));
                }
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let (mut prev, mut cur) = (0, self.friends[0][1]);
        order.push(0);
        seen[0] = true;
        while cur != 0 {
            if seen[cur] {
                return Err(Error::InvalidNetwork(
                    "not a circle: friendship cycle revisits a player".into(),
                ));
            }
            seen[cur] = true;
            order.push(cur);
            let list = &self.friends[cur];
            let next = if list[0] == prev { list[1] } else { list[0] };
            prev = cur;
            cur = next;
        }
        if order.len() != n {
            return Err(Error::InvalidNetwork(format!(
                "not a circle: the cycle through player 0 has {} of {n} players",
                order.len()
            )));
        }
        Ok(order)
    }
}

/// The circle design: `n` players equally spaced, each befriending both
/// neighbours.
///
/// Layout: player 0 sits at position 0; thereafter players alternate left and
/// right (1 at -1, 2 at +1, 3 at -2, 4 at +2, ...). With 1-based ids this puts
/// players 2 and 3 to the left and right of player 1.
pub fn generate_circle(n: usize) -> Result<DirectedNetwork> {
    if n < 3 {
        return Err(Error::InvalidNetwork(format!(
            "a circle needs at least 3 players, got {n}"
        )));
    }
    let position = |p: usize| -> usize {
        let step = p.div_ceil(2);
        if p % 2 == 1 {
            (n - step % n) % n
        } else {
            step % n
        }
    };
    let mut at = vec![0usize; n];
    for p in 0..n {
        at[position(p)] = p;
    }
    let lists = (0..n)
        .map(|p| {
            let pos = position(p);
            let mut f = vec![at[(pos + n - 1) % n], at[(pos + 1) % n]];
            f.sort_unstable();
            f
        })
        .collect();
    DirectedNetwork::from_friend_lists(lists)
}

/// Link state between an unordered pair `{i, j}`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairState {
    None,
    /// `i` is `j`'s friend only.
    IInJ,
    /// `j` is `i`'s friend only.
    JInI,
    Mutual,
}

/// The random design: every unordered pair independently draws a link state
/// with probabilities `(1 - 4/n, 1/n, 1/n, 2/n)` for none, one-way each way,
/// and mutual friendship, so out-degrees are Binomial(n - 1, 3/n).
pub fn generate_random(n: usize, seed: u64) -> Result<DirectedNetwork> {
    generate_random_with(n, &mut rng_from_seed(seed))
}

/// [`generate_random`] drawing from a caller-supplied generator.
///
/// Pairs are visited in lexicographic order and each consumes exactly one
/// uniform draw.
pub fn generate_random_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DirectedNetwork> {
    if n < 5 {
        return Err(Error::InvalidNetwork(format!(
            "random design needs at least 5 players, got {n}"
        )));
    }
    let nf = n as f64;
    let (p_none, p_one) = (1.0 - 4.0 / nf, 1.0 / nf);
    let mut lists = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let u: f64 = rng.random();
            let state = if u < p_none {
                PairState::None
            } else if u < p_none + p_one {
                PairState::IInJ
            } else if u < p_none + 2.0 * p_one {
                PairState::JInI
            } else {
                PairState::Mutual
            };
            match state {
                PairState::None => {}
                PairState::IInJ => lists[j].push(i),
                PairState::JInI => lists[i].push(j),
                PairState::Mutual => {
                    lists[i].push(j);
                    lists[j].push(i);
                }
            }
        }
    }
    DirectedNetwork::from_friend_lists(lists)
}
