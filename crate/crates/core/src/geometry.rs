//! Planar points and axis-aligned rectangles.

use crate::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    pub fn l1(&self, other: &Point<T>) -> T {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn linf(&self, other: &Point<T>) -> T {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn dist(&self, other: &Point<T>) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point<T>, t: T) -> Point<T> {
        Point::new(
            (T::one() - t) * self.x + t * other.x,
            (T::one() - t) * self.y + t * other.y,
        )
    }
}

/// Axis-aligned rectangle `[min.x, max.x] x [min.y, max.y]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Scalar> Rect<T> {
    pub fn new(min: Point<T>, max: Point<T>) -> Self {
        Rect { min, max }
    }

    /// The square of side `side` centred at `center`.
    pub fn square(center: Point<T>, side: T) -> Self {
        let h = side * T::half();
        Rect::new(
            Point::new(center.x - h, center.y - h),
            Point::new(center.x + h, center.y + h),
        )
    }

    /// Smallest rectangle containing all points, `None` for an empty iterator.
    pub fn bounding<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Point<T>>,
    {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut r = Rect::new(first, first);
        for p in it {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }

    pub fn union(&self, other: &Rect<T>) -> Rect<T> {
        Rect::new(
            Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        )
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> T {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point<T> {
        Point::new(
            (self.min.x + self.max.x) * T::half(),
            (self.min.y + self.max.y) * T::half(),
        )
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Area of the intersection (zero when disjoint or touching).
    pub fn overlap_area(&self, other: &Rect<T>) -> T {
        let w = self.max.x.min(other.max.x) - self.min.x.max(other.min.x);
        let h = self.max.y.min(other.max.y) - self.min.y.max(other.min.y);
        if w > T::zero() && h > T::zero() {
            w * h
        } else {
            T::zero()
        }
    }

    /// Whether the open interiors intersect, with `tol` slack in favour of
    /// "no intersection".
    pub fn interiors_intersect(&self, other: &Rect<T>, tol: T) -> bool {
        let w = self.max.x.min(other.max.x) - self.min.x.max(other.min.x);
        let h = self.max.y.min(other.max.y) - self.min.y.max(other.min.y);
        w > tol && h > tol
    }
}
