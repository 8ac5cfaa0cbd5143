/**
 * Geometry preparation for the interactive 3-D sphere scatter.
 *
 * The pure part (points -> typed position/color buffers) is separated
 * from the WebGL mounting so it can be tested without a browser.
 */

export const MEMBERSHIP_PALETTE: [number, number, number][] = [
  [0.13, 0.4, 0.67],
  [0.8, 0.4, 0.13],
  [0.13, 0.67, 0.4],
  [0.67, 0.13, 0.4],
  [0.4, 0.4, 0.13],
  [0.35, 0.18, 0.55],
  [0.1, 0.55, 0.55],
  [0.55, 0.3, 0.1],
  [0.3, 0.3, 0.3],
  [0.7, 0.55, 0.1],
];

export interface SphereGeometry {
  positions: Float32Array;
  colors: Float32Array;
  count: number;
}

/** Build flat position/color buffers from unit points and 1-based labels. */
export function sphereGeometry(points: number[][], labels?: number[]): SphereGeometry {
  const count = points.length;
  const positions = new Float32Array(count * 3);
  const colors = new Float32Array(count * 3);
  for (let i = 0; i < count; i++) {
    const p = points[i];
    if (p.length !== 3) throw new Error(`point ${i} has dimension ${p.length}, expected 3`);
    positions[3 * i] = p[0];
    positions[3 * i + 1] = p[1];
    positions[3 * i + 2] = p[2];
    const label = labels ? labels[i] : 1;
    const [r, g, b] = MEMBERSHIP_PALETTE[(label - 1 + MEMBERSHIP_PALETTE.length) % MEMBERSHIP_PALETTE.length];
    colors[3 * i] = r;
    colors[3 * i + 1] = g;
    colors[3 * i + 2] = b;
  }
  return { positions, colors, count };
}

/**
 * Mount an orbit-controlled point cloud into `container`. Browser-only;
 * imported lazily so tests never touch WebGL.
 */
export async function mountSphere(
  container: HTMLElement,
  geometry: SphereGeometry,
  size = 320,
): Promise<{ dispose: () => void }> {
  const THREE = await import('three');
  const { OrbitControls } = await import('three/examples/jsm/controls/OrbitControls.js');

  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0xffffff);
  const camera = new THREE.PerspectiveCamera(45, 1, 0.01, 50);
  camera.position.set(1.8, 1.2, 1.8);

  const wire = new THREE.Mesh(
    new THREE.SphereGeometry(0.995, 24, 16),
    new THREE.MeshBasicMaterial({ color: 0xeeeeee, wireframe: true, transparent: true, opacity: 0.4 }),
  );
  scene.add(wire);

  const cloudGeometry = new THREE.BufferGeometry();
  cloudGeometry.setAttribute('position', new THREE.BufferAttribute(geometry.positions, 3));
  cloudGeometry.setAttribute('color', new THREE.BufferAttribute(geometry.colors, 3));
  const cloud = new THREE.Points(
    cloudGeometry,
    new THREE.PointsMaterial({ size: 0.025, vertexColors: true }),
  );
  scene.add(cloud);

  const renderer = new THREE.WebGLRenderer({ antialias: true });
  renderer.setSize(size, size);
  container.appendChild(renderer.domElement);
  const controls = new OrbitControls(camera, renderer.domElement);

  let disposed = false;
  const animate = () => {
    if (disposed) return;
    requestAnimationFrame(animate);
    controls.update();
    renderer.render(scene, camera);
  };
  animate();

  return {
    dispose: () => {
      disposed = true;
      renderer.dispose();
      container.removeChild(renderer.domElement);
    },
  };
}
