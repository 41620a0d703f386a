use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of asana classes.
pub const NUM_CLASSES: usize = 8;

/// Canonical class names, in cycle order. The index of a name is its class id
/// on disk, on the wire and in confusion matrices.
pub const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "Pranamasana",
    "Hasta Uttanasana",
    "Hasta Padasana",
    "Ashwa Sanchalanasana",
    "Dandasana",
    "Ashtanga Namaskara",
    "Bhujangasana",
    "Svanasana",
];

/// One of the eight asana classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ClassLabel(u8);

impl ClassLabel {
    pub fn new(index: usize) -> Result<Self> {
        if index < NUM_CLASSES {
            Ok(ClassLabel(index as u8))
        } else {
            Err(Error::Label {
                index,
                num_classes: NUM_CLASSES,
            })
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        CLASS_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| ClassLabel(i as u8))
            .ok_or_else(|| Error::UnknownClass(name.to_string()))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        CLASS_NAMES[self.index()]
    }

    pub fn all() -> impl Iterator<Item = ClassLabel> {
        (0..NUM_CLASSES as u8).map(ClassLabel)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassLabel::from_name(s)
    }
}

impl TryFrom<u8> for ClassLabel {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        ClassLabel::new(value as usize)
    }
}

impl From<ClassLabel> for u8 {
    fn from(label: ClassLabel) -> u8 {
        label.0
    }
}

/// One-hot encoding of a class index over `num_classes` classes.
pub fn one_hot(index: usize, num_classes: usize) -> Result<Vec<f32>> {
    if index >= num_classes {
        return Err(Error::Label { index, num_classes });
    }
    let mut v = vec![0.0; num_classes];
    v[index] = 1.0;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_indices_are_a_bijection() {
        for label in ClassLabel::all() {
            assert_eq!(ClassLabel::from_name(label.name()).unwrap(), label);
        }
        assert_eq!(ClassLabel::new(3).unwrap().name(), "Ashwa Sanchalanasana");
        assert!(matches!(
            ClassLabel::from_name("Tadasana"),
            Err(Error::UnknownClass(_))
        ));
        assert!(ClassLabel::new(8).is_err());
    }

    #[test]
    fn one_hot_examples() {
        assert_eq!(
            one_hot(3, 8).unwrap(),
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            one_hot(0, 8).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert!(matches!(
            one_hot(8, 8),
            Err(Error::Label {
                index: 8,
                num_classes: 8
            })
        ));
    }

    #[test]
    fn one_hot_has_single_unit_entry() {
        for k in 1..12 {
            for i in 0..k {
                let v = one_hot(i, k).unwrap();
                assert_eq!(v.iter().sum::<f32>(), 1.0);
                assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 1);
            }
        }
    }
}
