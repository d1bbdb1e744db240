//! Dimension hierarchies: a lattice of levels with member domains and ancestor maps.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};

pub const ALL_LEVEL: &str = "ALL";
pub const ALL_MEMBER: &str = "all";

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub name: String,
    /// Longest distance from the bottom level; 0 for the bottom.
    pub depth: usize,
    members: Vec<String>,
    index: HashMap<String, usize>,
    properties: BTreeMap<String, Vec<String>>,
}

impl Level {
    fn new(name: &str) -> Self {
        Level {
            name: name.to_string(),
            depth: 0,
            members: Vec::new(),
            index: HashMap::new(),
            properties: BTreeMap::new(),
        }
    }

    fn intern(&mut self, member: &str) -> usize {
        if let Some(&i) = self.index.get(member) {
            return i;
        }
        let i = self.members.len();
        self.members.push(member.to_string());
        self.index.insert(member.to_string(), i);
        i
    }

    /// Members in ingestion order, which is also the domain order.
    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn position(&self, member: &str) -> Option<usize> {
        self.index.get(member).copied()
    }

    pub fn contains(&self, member: &str) -> bool {
        self.index.contains_key(member)
    }

    pub fn property_names(&self) -> impl Iterator<Item = &str> {
        self.properties.keys().map(String::as_str)
    }

    pub fn property(&self, name: &str, member: &str) -> Option<&str> {
        let i = self.position(member)?;
        self.properties.get(name).map(|v| v[i].as_str())
    }
}

/// One hierarchy path as read from a table: level names ordered from the most
/// detailed to the coarsest and one row per bottom member.
#[derive(Debug, Clone, Default)]
pub struct PathTable {
    pub levels: Vec<String>,
    /// `(level position in `levels`, property name)` for each property column.
    pub properties: Vec<(usize, String)>,
    /// Each row holds one value per level followed by one per property column.
    pub rows: Vec<Vec<String>>,
}

impl PathTable {
    /// Parses a CSV hierarchy table. Columns named `Level@prop` carry a property
    /// of `Level`; every other column is a level, ordered detailed to coarse.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut levels = Vec::new();
        let mut level_cols = Vec::new();
        let mut prop_cols = Vec::new();
        for (c, h) in header.iter().enumerate() {
            match h.split_once('@') {
                Some((lvl, prop)) => prop_cols.push((c, lvl.to_string(), prop.to_string())),
                None => {
                    levels.push(h.clone());
                    level_cols.push(c);
                }
            }
        }
        let mut properties = Vec::new();
        for (_, lvl, prop) in &prop_cols {
            let pos = levels.iter().position(|l| l == lvl).ok_or_else(|| {
                Error::Schema(format!("property column `{lvl}@{prop}` names an unknown level"))
            })?;
            properties.push((pos, prop.clone()));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let mut row: Vec<String> = level_cols.iter().map(|&c| rec.get(c).unwrap_or("").to_string()).collect();
            row.extend(prop_cols.iter().map(|(c, _, _)| rec.get(*c).unwrap_or("").to_string()));
            rows.push(row);
        }
        Ok(PathTable { levels, properties, rows })
    }

    pub fn from_rows(levels: &[&str], rows: &[&[&str]]) -> Self {
        PathTable {
            levels: levels.iter().map(|s| s.to_string()).collect(),
            properties: Vec::new(),
            rows: rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub name: String,
    /// Dimensions whose bottom member identifies a single fact. They are valid
    /// for queries but never proposed as grouping candidates.
    pub degenerate: bool,
    levels: Vec<Level>,
    /// `below[a][b]` is true when level `a` strictly precedes level `b`.
    below: Vec<Vec<bool>>,
    parents: Vec<Vec<usize>>,
    /// `bottom_map[l][x]`: member of level `l` above bottom member `x`.
    bottom_map: Vec<Vec<usize>>,
    anc_maps: HashMap<(usize, usize), Vec<usize>>,
}

impl Dimension {
    /// Builds a dimension from one or more hierarchy paths sharing a bottom
    /// level. The `ALL` level is synthesized above every path.
    pub fn from_paths(name: &str, paths: &[PathTable]) -> Result<Self> {
        let lattice = |message: String| Error::LatticeViolation {
            dimension: name.to_string(),
            message,
        };
        if paths.is_empty() || paths.iter().any(|p| p.levels.is_empty()) {
            return Err(lattice("no levels defined".into()));
        }
        let bottom_name = paths[0].levels[0].clone();
        if paths.iter().any(|p| p.levels[0] != bottom_name) {
            return Err(lattice("paths do not share a unique bottom level".into()));
        }
        if paths.iter().flat_map(|p| &p.levels).any(|l| l == ALL_LEVEL) {
            return Err(lattice("level ALL is implicit and cannot be declared".into()));
        }

        let mut levels: Vec<Level> = Vec::new();
        let mut level_idx: HashMap<String, usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for p in paths {
            let mut prev = None;
            for l in &p.levels {
                let i = *level_idx.entry(l.clone()).or_insert_with(|| {
                    levels.push(Level::new(l));
                    levels.len() - 1
                });
                if let Some(pr) = prev {
                    edges.push((pr, i));
                }
                prev = Some(i);
            }
        }
        let all = levels.len();
        let mut all_level = Level::new(ALL_LEVEL);
        all_level.intern(ALL_MEMBER);
        levels.push(all_level);
        for p in paths {
            edges.push((level_idx[p.levels.last().unwrap()], all));
        }
        edges.sort_unstable();
        edges.dedup();

        let n = levels.len();
        let mut parents = vec![Vec::new(); n];
        for &(a, b) in &edges {
            parents[a].push(b);
        }
        let mut below = vec![vec![false; n]; n];
        for &(a, b) in &edges {
            below[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if below[i][k] {
                    for j in 0..n {
                        if below[k][j] {
                            below[i][j] = true;
                        }
                    }
                }
            }
        }
        if (0..n).any(|i| below[i][i]) {
            return Err(lattice("levels are ordered inconsistently across paths".into()));
        }
        let bottom = 0;
        for l in 1..n {
            if !below[bottom][l] {
                return Err(lattice(format!("level {} is not above the bottom level", levels[l].name)));
            }
        }

        // Bottom domain, in order of first appearance over all paths.
        let mut seen_rows: Vec<HashMap<String, usize>> = Vec::new();
        for (pi, p) in paths.iter().enumerate() {
            let mut seen = HashMap::new();
            for (ri, row) in p.rows.iter().enumerate() {
                let m = &row[0];
                if m.is_empty() {
                    return Err(lattice(format!("empty bottom member in path {pi} row {}", ri + 1)));
                }
                if seen.insert(m.clone(), ri).is_some() {
                    return Err(Error::DuplicateMember {
                        dimension: name.into(),
                        level: bottom_name.clone(),
                        member: m.clone(),
                    });
                }
                levels[bottom].intern(m);
            }
            seen_rows.push(seen);
        }
        let nb = levels[bottom].members.len();
        let mut bottom_map: Vec<Option<Vec<usize>>> = vec![None; n];
        bottom_map[bottom] = Some((0..nb).collect());
        bottom_map[all] = Some(vec![0; nb]);

        for (pi, p) in paths.iter().enumerate() {
            let seen = &seen_rows[pi];
            for (col, lname) in p.levels.iter().enumerate().skip(1) {
                let li = level_idx[lname];
                let mut map = Vec::with_capacity(nb);
                for x in 0..nb {
                    let bm = levels[bottom].members[x].clone();
                    let Some(&ri) = seen.get(&bm) else {
                        return Err(Error::Dangling {
                            dimension: name.into(),
                            level: bottom_name.clone(),
                            member: bm,
                            parent_level: lname.clone(),
                        });
                    };
                    let v = &p.rows[ri][col];
                    if v.is_empty() {
                        return Err(Error::Dangling {
                            dimension: name.into(),
                            level: p.levels[col - 1].clone(),
                            member: p.rows[ri][col - 1].clone(),
                            parent_level: lname.clone(),
                        });
                    }
                    map.push(levels[li].intern(v));
                }
                match &bottom_map[li] {
                    Some(prev) if *prev != map => {
                        return Err(lattice(format!("level {lname} has different members in two paths")));
                    }
                    Some(_) => {}
                    None => bottom_map[li] = Some(map),
                }
            }
        }
        let bottom_map: Vec<Vec<usize>> = bottom_map.into_iter().map(Option::unwrap).collect();

        // Functional ancestor maps for every comparable pair.
        let mut anc_maps = HashMap::new();
        for from in 0..n {
            for to in 0..n {
                if !below[from][to] {
                    continue;
                }
                let mut map: Vec<Option<usize>> = vec![None; levels[from].members.len()];
                for x in 0..nb {
                    let (a, b) = (bottom_map[from][x], bottom_map[to][x]);
                    match map[a] {
                        Some(prev) if prev != b => {
                            return Err(Error::Ambiguous {
                                dimension: name.into(),
                                level: levels[to].name.clone(),
                                member: levels[from].members[a].clone(),
                                first: levels[to].members[prev].clone(),
                                second: levels[to].members[b].clone(),
                            });
                        }
                        _ => map[a] = Some(b),
                    }
                }
                let map: Vec<usize> = map.into_iter().map(Option::unwrap).collect();
                if map.windows(2).any(|w| w[0] > w[1]) {
                    log::warn!(
                        "dimension {name}: ancestor map {} -> {} is not monotone in member order",
                        levels[from].name,
                        levels[to].name
                    );
                }
                anc_maps.insert((from, to), map);
            }
        }

        // Depth: longest chain from the bottom.
        let mut depth = vec![0usize; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&l| (0..n).filter(|&k| below[k][l]).count());
        for &l in &order {
            for &p in &parents[l] {
                depth[p] = depth[p].max(depth[l] + 1);
            }
        }
        for (l, d) in depth.into_iter().enumerate() {
            levels[l].depth = d;
        }

        // Properties.
        for (pi, p) in paths.iter().enumerate() {
            let seen = &seen_rows[pi];
            for (k, (lpos, prop)) in p.properties.iter().enumerate() {
                let li = level_idx[&p.levels[*lpos]];
                let mut vals: Vec<Option<String>> = vec![None; levels[li].members.len()];
                for x in 0..nb {
                    let row = &p.rows[seen[&levels[bottom].members[x]]];
                    let v = row[p.levels.len() + k].clone();
                    let m = bottom_map[li][x];
                    if v.is_empty() {
                        return Err(Error::Schema(format!(
                            "dimension {name}: property {prop} missing for member {}",
                            levels[li].members[m]
                        )));
                    }
                    match &vals[m] {
                        Some(prev) if *prev != v => {
                            return Err(Error::Schema(format!(
                                "dimension {name}: property {prop} of {} has two values",
                                levels[li].members[m]
                            )));
                        }
                        _ => vals[m] = Some(v),
                    }
                }
                levels[li]
                    .properties
                    .insert(prop.clone(), vals.into_iter().map(Option::unwrap).collect());
            }
        }

        Ok(Dimension {
            name: name.to_string(),
            degenerate: false,
            levels,
            below,
            parents,
            bottom_map,
            anc_maps,
        })
    }

    /// Convenience constructor for a single-path dimension.
    pub fn chain(name: &str, levels: &[&str], rows: &[&[&str]]) -> Result<Self> {
        Self::from_paths(name, &[PathTable::from_rows(levels, rows)])
    }

    /// Loads a dimension from one CSV file per hierarchy path.
    pub fn from_csv_files<P: AsRef<Path>>(name: &str, files: &[P]) -> Result<Self> {
        let mut paths = Vec::new();
        for f in files {
            let file = std::fs::File::open(f.as_ref())
                .map_err(|e| Error::Io(format!("{}: {e}", f.as_ref().display())))?;
            paths.push(PathTable::from_csv(file)?);
        }
        Self::from_paths(name, &paths)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, idx: usize) -> &Level {
        &self.levels[idx]
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn all(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level_index(&self, name: &str) -> Result<usize> {
        self.levels.iter().position(|l| l.name == name).ok_or_else(|| Error::UnknownLevel {
            dimension: self.name.clone(),
            level: name.to_string(),
        })
    }

    /// `a ≼ b` in the level order.
    pub fn precedes_eq(&self, a: usize, b: usize) -> bool {
        a == b || self.below[a][b]
    }

    /// Immediate coarser levels of `l`.
    pub fn parents(&self, l: usize) -> &[usize] {
        &self.parents[l]
    }

    /// Immediate finer levels of `l`.
    pub fn children(&self, l: usize) -> Vec<usize> {
        (0..self.levels.len()).filter(|&c| self.parents[c].contains(&l)).collect()
    }

    fn member_index(&self, level: usize, m: &str) -> Result<usize> {
        self.levels[level].position(m).ok_or_else(|| Error::UnknownMember {
            dimension: self.name.clone(),
            level: self.levels[level].name.clone(),
            member: m.to_string(),
        })
    }

    fn incomparable(&self, from: usize, to: usize) -> Error {
        Error::Incomparable {
            dimension: self.name.clone(),
            from: self.levels[from].name.clone(),
            to: self.levels[to].name.clone(),
        }
    }

    /// Index form of [`Dimension::anc`].
    pub fn anc_idx(&self, from: usize, to: usize, m: usize) -> Option<usize> {
        if from == to {
            return Some(m);
        }
        self.anc_maps.get(&(from, to)).map(|map| map[m])
    }

    pub fn anc(&self, from: usize, to: usize, m: &str) -> Result<&str> {
        let i = self.member_index(from, m)?;
        let j = self.anc_idx(from, to, i).ok_or_else(|| self.incomparable(from, to))?;
        Ok(&self.levels[to].members[j])
    }

    /// Members of level `to` whose ancestor at `from` is `m`, in domain order.
    pub fn desc(&self, from: usize, to: usize, m: &str) -> Result<Vec<&str>> {
        let i = self.member_index(from, m)?;
        if from == to {
            return Ok(vec![&self.levels[from].members[i]]);
        }
        let map = self.anc_maps.get(&(to, from)).ok_or_else(|| self.incomparable(from, to))?;
        Ok(map
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == i)
            .map(|(x, _)| self.levels[to].members[x].as_str())
            .collect())
    }

    /// True when the bottom-level extents of `a` (at level `la`) and `b` (at
    /// level `lb`) overlap. For comparable levels this is the ancestor test.
    pub fn related(&self, la: usize, a: &str, lb: usize, b: &str) -> bool {
        let (Some(ia), Some(ib)) = (self.levels[la].position(a), self.levels[lb].position(b)) else {
            return false;
        };
        if la == lb {
            return ia == ib;
        }
        if let Some(j) = self.anc_idx(la, lb, ia) {
            return j == ib;
        }
        if let Some(j) = self.anc_idx(lb, la, ib) {
            return j == ia;
        }
        (0..self.bottom_map[0].len()).any(|x| self.bottom_map[la][x] == ia && self.bottom_map[lb][x] == ib)
    }
}
