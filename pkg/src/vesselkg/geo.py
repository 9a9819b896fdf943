"""Spherical-earth geodesic helpers shared across the package.

All distances are great-circle (haversine) on a sphere of radius
EARTH_RADIUS_M; the error vs. an ellipsoid is negligible at the
gap scales handled here.
"""

from math import atan2, cos, radians, sin, sqrt

EARTH_RADIUS_M = 6_371_000.0


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two lat/lon points in meters."""
    phi1, lam1, phi2, lam2 = map(radians, (lat1, lon1, lat2, lon2))
    dphi = phi2 - phi1
    dlam = lam2 - lam1
    a = sin(dphi / 2) ** 2 + cos(phi1) * cos(phi2) * sin(dlam / 2) ** 2
    return EARTH_RADIUS_M * 2 * atan2(sqrt(a), sqrt(1 - a))


def implied_speed_kn(lat1: float, lon1: float, lat2: float, lon2: float, dt_s: float) -> float:
    """Speed in knots implied by covering the great-circle distance in dt_s seconds."""
    if dt_s <= 0:
        return float("inf")
    return haversine_m(lat1, lon1, lat2, lon2) / dt_s * 3600.0 / 1852.0


def angle_diff_deg(a: float, b: float) -> float:
    """Shortest-arc difference b - a in degrees, in (-180, 180]."""
    d = (b - a) % 360.0
    if d > 180.0:
        d -= 360.0
    return d


def interpolate_angle_deg(a: float, b: float, frac: float) -> float:
    """Interpolate between two angles along the shortest arc; result in [0, 360)."""
    return (a + angle_diff_deg(a, b) * frac) % 360.0
