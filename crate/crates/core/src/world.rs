//! Catalog of object types, objects and locations used to draw trial goals
//! and plausible HEL mistakes.

use crate::domain::{DomainError, TargetRef, WorldGoal};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectTypeEntry {
    pub name: String,
    pub instances: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub types: Vec<ObjectTypeEntry>,
    pub locations: Vec<String>,
}

impl Default for World {
    fn default() -> Self {
        World::kitchen()
    }
}

impl World {
    pub fn kitchen() -> Self {
        let entry = |name: &str, inst: &[&str]| ObjectTypeEntry {
            name: name.to_string(),
            instances: inst.iter().map(|s| s.to_string()).collect(),
        };
        World {
            types: vec![
                entry("bowl", &["bowl_small", "bowl_large", "bowl_blue"]),
                entry("pot", &["pot_red", "pot_steel"]),
                entry("cup", &["cup_white", "cup_mug"]),
                entry("spoon", &["spoon_wood", "spoon_metal"]),
                entry("plate", &["plate_round", "plate_square"]),
                entry("pan", &["pan_small", "pan_large"]),
            ],
            locations: ["cabinet_upper", "cabinet_lower", "drawer_left", "drawer_right", "counter", "shelf"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    fn entry(&self, object_type: &str) -> Option<&ObjectTypeEntry> {
        self.types.iter().find(|t| t.name == object_type)
    }

    pub fn sample_goal<R: Rng + ?Sized>(&self, rng: &mut R) -> WorldGoal {
        let t = self.types.choose(rng).expect("world has object types");
        let object = t.instances.choose(rng).expect("object type has instances");
        let location = self.locations.choose(rng).expect("world has locations");
        WorldGoal::new(t.name.clone(), location.clone(), object.clone())
    }

    /// Checks that the goal names a known object of its own type and a
    /// known location.
    pub fn check_goal(&self, goal: &WorldGoal) -> Result<(), DomainError> {
        goal.validate()?;
        let entry = self
            .entry(&goal.object_type)
            .ok_or_else(|| DomainError::InvalidGoal(format!("unknown object type '{}'", goal.object_type)))?;
        if !entry.instances.contains(&goal.object) {
            return Err(DomainError::InvalidGoal(format!(
                "object '{}' is not a {}",
                goal.object, goal.object_type
            )));
        }
        if !self.locations.contains(&goal.location) {
            return Err(DomainError::InvalidGoal(format!("unknown location '{}'", goal.location)));
        }
        Ok(())
    }

    pub fn wrong_type_name<R: Rng + ?Sized>(&self, goal: &WorldGoal, rng: &mut R) -> String {
        let others: Vec<&ObjectTypeEntry> = self.types.iter().filter(|t| t.name != goal.object_type).collect();
        others.choose(rng).expect("world has at least two object types").name.clone()
    }

    /// An object of a different type.
    pub fn wrong_type_object<R: Rng + ?Sized>(&self, goal: &WorldGoal, rng: &mut R) -> TargetRef {
        let others: Vec<&ObjectTypeEntry> = self.types.iter().filter(|t| t.name != goal.object_type).collect();
        let t = others.choose(rng).expect("world has at least two object types");
        let id = t.instances.choose(rng).expect("object type has instances");
        TargetRef::object(id.clone(), t.name.clone())
    }

    /// Another object of the goal's type, if the type has one.
    pub fn sibling_object<R: Rng + ?Sized>(&self, goal: &WorldGoal, rng: &mut R) -> Option<TargetRef> {
        let entry = self.entry(&goal.object_type)?;
        let others: Vec<&String> = entry.instances.iter().filter(|i| **i != goal.object).collect();
        others
            .choose(rng)
            .map(|id| TargetRef::object((*id).clone(), goal.object_type.clone()))
    }

    pub fn wrong_location<R: Rng + ?Sized>(&self, goal: &WorldGoal, rng: &mut R) -> TargetRef {
        let others: Vec<&String> = self.locations.iter().filter(|l| **l != goal.location).collect();
        TargetRef::location((*others.choose(rng).expect("world has at least two locations")).clone())
    }
}
