//! Storage for the visited (non-floor) set of a walk.
//!
//! Two interchangeable implementations:
//!
//! * [`NaiveSet`] keeps every visited site in a hash set. It is the reference
//!   implementation used by the differential tests.
//! * [`ColumnStore`] exploits the fact that a walk started from a
//!   downward-closed configuration keeps every column a full interval
//!   `[1, h]`, so one small height per `(x, y)` column is enough. Heights are
//!   packed into dense 16x16 tiles. A single detached interval tracks the
//!   column currently being descended through fresh vertices. Anything that
//!   does not fit this shape (arbitrary starting configurations, the
//!   probabilistic-drift mode) goes into a spill set, so set semantics hold
//!   for every insertion order.
//!
//! Both stores also remember which floor points were visited, which is what
//! the distinct-floor-point counter needs. Floor vertices are never members
//! of the visited set.

use std::cell::Cell;
use std::mem::size_of;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::site::Site;

pub trait VisitedStore: Clone + Default + Send {
    /// Membership of a non-floor site. Always `false` for `z <= 0`.
    fn contains(&self, site: Site) -> bool;

    /// Insert a non-floor site. Returns `true` when it was not yet present.
    fn insert(&mut self, site: Site) -> Result<bool>;

    /// Record a visit to the floor point `(x, y, 0)`. Returns `true` on the
    /// first visit.
    fn mark_floor(&mut self, x: i32, y: i32) -> bool;

    fn floor_marked(&self, x: i32, y: i32) -> bool;

    /// Number of visited non-floor sites.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Approximate heap footprint in bytes.
    fn memory_bytes(&self) -> usize;

    /// All members, sorted.
    fn sites(&self) -> Vec<Site>;

    fn from_sites<I: IntoIterator<Item = Site>>(sites: I) -> Result<Self> {
        let mut store = Self::default();
        for s in sites {
            store.insert(s)?;
        }
        Ok(store)
    }
}

fn check_insertable(site: Site) -> Result<()> {
    if site.z == 0 {
        Err(Error::FloorInsert(site))
    } else if site.z < 0 {
        Err(Error::BelowFloor(site))
    } else {
        Ok(())
    }
}

fn hash_table_bytes<T>(capacity: usize) -> usize {
    // hashbrown: one control byte per bucket, buckets = capacity * 8 / 7 rounded up to 2^k
    if capacity == 0 {
        return 0;
    }
    let buckets = (capacity * 8 / 7).next_power_of_two();
    buckets * (size_of::<T>() + 1)
}

#[derive(Clone, Debug, Default)]
pub struct NaiveSet {
    visited: FxHashSet<Site>,
    floor: FxHashSet<(i32, i32)>,
}

impl VisitedStore for NaiveSet {
    fn contains(&self, site: Site) -> bool {
        site.z > 0 && self.visited.contains(&site)
    }

    fn insert(&mut self, site: Site) -> Result<bool> {
        check_insertable(site)?;
        Ok(self.visited.insert(site))
    }

    fn mark_floor(&mut self, x: i32, y: i32) -> bool {
        self.floor.insert((x, y))
    }

    fn floor_marked(&self, x: i32, y: i32) -> bool {
        self.floor.contains(&(x, y))
    }

    fn len(&self) -> usize {
        self.visited.len()
    }

    fn memory_bytes(&self) -> usize {
        hash_table_bytes::<Site>(self.visited.capacity())
            + hash_table_bytes::<(i32, i32)>(self.floor.capacity())
    }

    fn sites(&self) -> Vec<Site> {
        let mut v: Vec<Site> = self.visited.iter().copied().collect();
        v.sort_unstable();
        v
    }
}

const TILE_BITS: i32 = 4;
const TILE_SIDE: i32 = 1 << TILE_BITS;
const TILE_MASK: i32 = TILE_SIDE - 1;
const TILE_CELLS: usize = (TILE_SIDE * TILE_SIDE) as usize;
const FLOOR_BIT: u8 = 0x80;
const HEIGHT_MASK: u8 = 0x7f;
/// Cell marker meaning "height lives in the `tall` map".
const TALL: u8 = HEIGHT_MASK;

type Tile = Box<[u8; TILE_CELLS]>;

#[inline]
fn tile_key(x: i32, y: i32) -> u64 {
    (((x >> TILE_BITS) as u32 as u64) << 32) | ((y >> TILE_BITS) as u32 as u64)
}

#[inline]
fn cell_index(x: i32, y: i32) -> usize {
    (((x & TILE_MASK) << TILE_BITS) | (y & TILE_MASK)) as usize
}

#[inline]
fn column_key(x: i32, y: i32) -> u64 {
    ((x as u32 as u64) << 32) | (y as u32 as u64)
}

/// Interval `[lo, hi]` of one column that is visited but not yet connected
/// to the column's base.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct OpenDescent {
    x: i32,
    y: i32,
    lo: i32,
    hi: i32,
}

#[derive(Clone, Debug, Default)]
pub struct ColumnStore {
    tiles: Vec<Tile>,
    index: FxHashMap<u64, u32>,
    tall: FxHashMap<u64, u32>,
    open: Option<OpenDescent>,
    spill: FxHashSet<Site>,
    len: usize,
    last: Cell<Option<(u64, u32)>>,
}

impl ColumnStore {
    #[inline]
    fn tile_of(&self, key: u64) -> Option<u32> {
        if let Some((k, i)) = self.last.get() {
            if k == key {
                return Some(i);
            }
        }
        let found = self.index.get(&key).copied();
        if let Some(i) = found {
            self.last.set(Some((key, i)));
        }
        found
    }

    #[inline]
    fn tile_of_or_insert(&mut self, key: u64) -> u32 {
        if let Some(i) = self.tile_of(key) {
            return i;
        }
        let i = self.tiles.len() as u32;
        self.tiles.push(Box::new([0u8; TILE_CELLS]));
        self.index.insert(key, i);
        self.last.set(Some((key, i)));
        i
    }

    #[inline]
    fn cell(&self, x: i32, y: i32) -> u8 {
        match self.tile_of(tile_key(x, y)) {
            Some(i) => self.tiles[i as usize][cell_index(x, y)],
            None => 0,
        }
    }

    /// Height `h` of the downward-closed part `[1, h]` of column `(x, y)`.
    #[inline]
    pub fn column_height(&self, x: i32, y: i32) -> u32 {
        let h = self.cell(x, y) & HEIGHT_MASK;
        if h == TALL {
            self.tall[&column_key(x, y)]
        } else {
            h as u32
        }
    }

    fn set_column_height(&mut self, x: i32, y: i32, h: u32) {
        let t = self.tile_of_or_insert(tile_key(x, y)) as usize;
        let c = &mut self.tiles[t][cell_index(x, y)];
        let flag = *c & FLOOR_BIT;
        if h >= TALL as u32 {
            *c = flag | TALL;
            self.tall.insert(column_key(x, y), h);
        } else {
            *c = flag | h as u8;
            if !self.tall.is_empty() {
                self.tall.remove(&column_key(x, y));
            }
        }
    }

    /// True when every member is part of a full column interval, i.e. the
    /// stored set is downward-closed.
    pub fn is_downward_closed(&self) -> bool {
        self.open.is_none() && self.spill.is_empty()
    }

    /// Number of columns with nonzero height.
    pub fn columns(&self) -> usize {
        self.tiles
            .iter()
            .map(|t| t.iter().filter(|&&c| c & HEIGHT_MASK != 0).count())
            .sum()
    }
}

impl VisitedStore for ColumnStore {
    #[inline]
    fn contains(&self, site: Site) -> bool {
        if site.z <= 0 {
            return false;
        }
        if site.z as u32 <= self.column_height(site.x, site.y) {
            return true;
        }
        if let Some(o) = self.open {
            if o.x == site.x && o.y == site.y && o.lo <= site.z && site.z <= o.hi {
                return true;
            }
        }
        !self.spill.is_empty() && self.spill.contains(&site)
    }

    fn insert(&mut self, site: Site) -> Result<bool> {
        check_insertable(site)?;
        if self.contains(site) {
            return Ok(false);
        }
        let (x, y, z) = (site.x, site.y, site.z);
        let h = self.column_height(x, y) as i32;
        if z == h + 1 {
            let mut top = z;
            loop {
                if let Some(o) = self.open {
                    if o.x == x && o.y == y && o.lo == top + 1 {
                        top = o.hi;
                        self.open = None;
                        continue;
                    }
                }
                if !self.spill.is_empty() && self.spill.remove(&Site::new(x, y, top + 1)) {
                    top += 1;
                    continue;
                }
                break;
            }
            self.set_column_height(x, y, top as u32);
        } else {
            match self.open {
                Some(ref mut o) if o.x == x && o.y == y && z == o.lo - 1 => o.lo = z,
                Some(ref mut o) if o.x == x && o.y == y && z == o.hi + 1 => o.hi = z,
                None => self.open = Some(OpenDescent { x, y, lo: z, hi: z }),
                Some(_) => {
                    self.spill.insert(site);
                }
            }
        }
        self.len += 1;
        Ok(true)
    }

    #[inline]
    fn mark_floor(&mut self, x: i32, y: i32) -> bool {
        let t = self.tile_of_or_insert(tile_key(x, y)) as usize;
        let c = &mut self.tiles[t][cell_index(x, y)];
        let fresh = *c & FLOOR_BIT == 0;
        *c |= FLOOR_BIT;
        fresh
    }

    fn floor_marked(&self, x: i32, y: i32) -> bool {
        self.cell(x, y) & FLOOR_BIT != 0
    }

    fn len(&self) -> usize {
        self.len
    }

    fn memory_bytes(&self) -> usize {
        self.tiles.capacity() * size_of::<Tile>()
            + self.tiles.len() * TILE_CELLS
            + hash_table_bytes::<(u64, u32)>(self.index.capacity())
            + hash_table_bytes::<(u64, u32)>(self.tall.capacity())
            + hash_table_bytes::<Site>(self.spill.capacity())
    }

    fn sites(&self) -> Vec<Site> {
        let mut out = Vec::with_capacity(self.len);
        for (&key, &i) in &self.index {
            let tx = (key >> 32) as u32 as i32;
            let ty = key as u32 as i32;
            for (ci, &c) in self.tiles[i as usize].iter().enumerate() {
                let x = (tx << TILE_BITS) | (ci as i32 >> TILE_BITS);
                let y = (ty << TILE_BITS) | (ci as i32 & TILE_MASK);
                let h = if c & HEIGHT_MASK == TALL {
                    self.tall[&column_key(x, y)]
                } else {
                    (c & HEIGHT_MASK) as u32
                };
                out.extend((1..=h as i32).map(|z| Site::new(x, y, z)));
            }
        }
        if let Some(o) = self.open {
            out.extend((o.lo..=o.hi).map(|z| Site::new(o.x, o.y, z)));
        }
        out.extend(self.spill.iter().copied());
        out.sort_unstable();
        out
    }
}
