use std::fmt;

use serde::{Deserialize, Serialize};

/// A point of the cubic lattice. In half-space contexts `z >= 0` and `z == 0`
/// marks a floor vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Site { x, y, z }
    }

    #[inline]
    pub fn is_floor(&self) -> bool {
        self.z == 0
    }

    #[inline]
    pub fn shifted(self, dir: Dir) -> Site {
        let (dx, dy, dz) = dir.offset();
        Site::new(self.x + dx, self.y + dy, self.z + dz)
    }

    /// Image under `(x, y, z) -> (x, y, |z|)`.
    #[inline]
    pub fn folded(self) -> Site {
        Site::new(self.x, self.y, self.z.abs())
    }

    pub fn below(self) -> Site {
        Site::new(self.x, self.y, self.z - 1)
    }

    pub fn neighbors(self) -> impl Iterator<Item = Site> {
        Dir::ALL.into_iter().map(move |d| self.shifted(d))
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

impl From<(i32, i32, i32)> for Site {
    fn from((x, y, z): (i32, i32, i32)) -> Self {
        Site::new(x, y, z)
    }
}

/// One of the six nearest-neighbor moves.
///
/// The discriminant order matters: the first five are the floor moves
/// (four sides and up), all six are the simple-random-walk moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    East,
    West,
    North,
    South,
    Up,
    Down,
}

impl Dir {
    pub const ALL: [Dir; 6] = [
        Dir::East,
        Dir::West,
        Dir::North,
        Dir::South,
        Dir::Up,
        Dir::Down,
    ];

    #[inline]
    pub fn from_index(i: u32) -> Dir {
        Dir::ALL[i as usize]
    }

    #[inline]
    pub fn offset(self) -> (i32, i32, i32) {
        match self {
            Dir::East => (1, 0, 0),
            Dir::West => (-1, 0, 0),
            Dir::North => (0, 1, 0),
            Dir::South => (0, -1, 0),
            Dir::Up => (0, 0, 1),
            Dir::Down => (0, 0, -1),
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Dir::Up | Dir::Down)
    }
}

/// Which step rule applies at the walker's current vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    Floor,
    Visited,
    New,
}
