// Planar kinematics and scene geometry, mirroring the service's convention:
// +y away from the user, +x to the user's right; theta1 from +y toward +x,
// theta2 folds link 2 back toward -x.  Lengths in mm, angles in degrees at
// this boundary (the stream carries degrees).

export interface ArmGeometry {
  l1: number;   // mm
  l2: number;
}

export const FACTORY_ARM: ArmGeometry = { l1: 674, l2: 545 };

export interface Point {
  x: number;
  y: number;
}

const DEG = Math.PI / 180;

export function forwardKinematics(geom: ArmGeometry,
                                  thetaDeg: [number, number]):
    { elbow: Point; ee: Point } {
  const q1 = thetaDeg[0] * DEG;
  const q12 = q1 - thetaDeg[1] * DEG;
  const elbow = { x: geom.l1 * Math.sin(q1), y: geom.l1 * Math.cos(q1) };
  return {
    elbow,
    ee: { x: elbow.x + geom.l2 * Math.sin(q12),
          y: elbow.y + geom.l2 * Math.cos(q12) },
  };
}

// Annular sectors of the task scene in the base frame.  Bearings psi are
// measured from +y toward -x; these constants mirror the service defaults.
export interface Sector {
  rLo: number;
  rHi: number;
  psiLoDeg: number;
  psiHiDeg: number;
}

export const SCENE = {
  cooperative: { rLo: 574.5, rHi: 724.5, psiLoDeg: 0, psiHiDeg: 45.5 } as Sector,
  main: { rLo: 574.5, rHi: 724.5, psiLoDeg: -45.5, psiHiDeg: 45.5 } as Sector,
  human: { rLo: 0, rHi: 551, psiLoDeg: 0.5, psiHiDeg: 40 } as Sector,
};

/** Polygon approximating a sector, for canvas fill (base-frame mm). */
export function sectorPolygon(s: Sector, segments = 48): Point[] {
  const pts: Point[] = [];
  for (let i = 0; i <= segments; i++) {
    const psi = (s.psiLoDeg + (s.psiHiDeg - s.psiLoDeg) * (i / segments)) * DEG;
    pts.push({ x: -s.rLo * Math.sin(psi), y: s.rLo * Math.cos(psi) });
  }
  for (let i = segments; i >= 0; i--) {
    const psi = (s.psiLoDeg + (s.psiHiDeg - s.psiLoDeg) * (i / segments)) * DEG;
    pts.push({ x: -s.rHi * Math.sin(psi), y: s.rHi * Math.cos(psi) });
  }
  return pts;
}

export function sectorContains(s: Sector, p: Point): boolean {
  const r = Math.hypot(p.x, p.y);
  const psi = Math.atan2(-p.x, p.y) / DEG;
  return r >= s.rLo && r <= s.rHi && psi >= s.psiLoDeg && psi <= s.psiHiDeg;
}

/** Log-scale gauge position of a stiffness value within [kMin, kMax]. */
export function stiffnessFraction(k: number, kMin = 70, kMax = 8000): number {
  const clamped = Math.min(Math.max(k, kMin), kMax);
  return (Math.log(clamped) - Math.log(kMin)) / (Math.log(kMax) - Math.log(kMin));
}
