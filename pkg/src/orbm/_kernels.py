"""Numba kernels for the Monte Carlo layer.

All kernels mutate preallocated arrays in place and use plain float64 state
(x, y) instead of complex, which keeps them nopython-friendly.  Randomness is
passed in as precomputed Gaussian blocks except for the excursion samplers,
which draw internally from a seeded generator (their step counts are
data-dependent).
"""

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi


@njit(cache=True, inline="always")
def _interp_circle(grid, a):
    """Linear interpolation of a periodic grid function at angle a."""
    m = grid.shape[0]
    p = (a % TWO_PI) / TWO_PI * m
    j = int(p)
    if j >= m:
        j -= m
    w = p - j
    j1 = j + 1
    if j1 >= m:
        j1 = 0
    return grid[j] * (1.0 - w) + grid[j1] * w


@njit(cache=True, inline="always")
def _oblique_pushback(xp, yp, tan_grid):
    """Iterated push of an external point back to the closed disk.

    Each pass moves along the reflection vector at the radial projection by
    the current overshoot; the vector has unit inward-normal component, so
    the local-time increment is the summed overshoot.  Returns
    (ok, x, y, local_time_increment, boundary_angle).
    """
    ell_tot = 0.0
    a = 0.0
    r = np.sqrt(xp * xp + yp * yp)
    it = 0
    while r > 1.0 + 1e-15:
        it += 1
        if it > 64:
            return False, xp, yp, 0.0, 0.0
        ell = r - 1.0
        bx = xp / r
        by = yp / r
        a = np.arctan2(by, bx)
        tn = _interp_circle(tan_grid, a)
        xp += ell * (-bx - tn * by)
        yp += ell * (tn * bx - by)
        ell_tot += ell
        r = np.sqrt(xp * xp + yp * yp)
    if r > 1.0:
        xp /= r
        yp /= r
    return True, xp, yp, ell_tot, a


@njit(cache=True)
def disk_steps(x, y, L, Lg, ang, gauss, spare, tan_grid, g_grid, sqrt_dt,
               track_angle, zx, zy, rec_x, rec_y, rec_L, record, rejects):
    """One block of Euler-Skorokhod steps for all replicas.

    gauss/spare: (steps, n, 2) standard normals (spare is used once when the
    oblique pushback fails to converge; a second failure skips the step).
    When record is true, rec_* must be (steps, n) and receive the state after
    each step.  When track_angle is true, ang accumulates the continuous
    argument of X - (zx + i zy).
    """
    nsteps = gauss.shape[0]
    n = x.shape[0]
    for s in range(nsteps):
        for i in range(n):
            x0 = x[i]
            y0 = y[i]
            nx = x0 + sqrt_dt * gauss[s, i, 0]
            ny = y0 + sqrt_dt * gauss[s, i, 1]
            ell = 0.0
            ga = 0.0
            if nx * nx + ny * ny > 1.0:
                ok, px, py, ell, a = _oblique_pushback(nx, ny, tan_grid)
                if not ok:
                    rejects[i] += 1
                    nx = x0 + sqrt_dt * spare[s, i, 0]
                    ny = y0 + sqrt_dt * spare[s, i, 1]
                    if nx * nx + ny * ny > 1.0:
                        ok, px, py, ell, a = _oblique_pushback(nx, ny, tan_grid)
                        if not ok:
                            rejects[i] += 1
                            px, py, ell = x0, y0, 0.0
                        nx, ny = px, py
                else:
                    nx, ny = px, py
                if ell > 0.0:
                    L[i] += ell
                    Lg[i] += ell * _interp_circle(g_grid, a)
            if track_angle:
                ux = x0 - zx
                uy = y0 - zy
                vx = nx - zx
                vy = ny - zy
                ang[i] += np.arctan2(ux * vy - uy * vx, ux * vx + uy * vy)
            x[i] = nx
            y[i] = ny
            if record:
                rec_x[s, i] = nx
                rec_y[s, i] = ny
                rec_L[s, i] = L[i]


@njit(cache=True)
def half_plane_steps(x, y, L, clock, gauss, tan_grid, sqrt_dt, dt,
                     deep_log, in_deep, entries, entry_counts,
                     stop_at_clock, clock_targets, done,
                     rec_x, rec_y, rec_L, rec_c, record):
    """Euler-Skorokhod steps in the left half-plane {Re z <= 0}.

    The reflection vector at a boundary point i*b is i*tan(theta(e^{i b})) - 1
    (unit inward normal plus tangential push); the boundary is flat, so a
    single pushback lands exactly on it.  clock accumulates the squared
    modulus of exp(state), the time change onto the disk.  Crossings into
    {Re z <= deep_log} are recorded per replica in entries/entry_counts.
    """
    nsteps = gauss.shape[0]
    n = x.shape[0]
    cap = entries.shape[1]
    for s in range(nsteps):
        for i in range(n):
            if stop_at_clock and done[i]:
                continue
            w_old = np.exp(2.0 * x[i])
            nx = x[i] + sqrt_dt * gauss[s, i, 0]
            ny = y[i] + sqrt_dt * gauss[s, i, 1]
            if nx > 0.0:
                ell = nx
                tn = _interp_circle(tan_grid, ny)
                nx = 0.0
                ny += ell * tn
                L[i] += ell
            clock[i] += 0.5 * (w_old + np.exp(2.0 * nx)) * dt
            x[i] = nx
            y[i] = ny
            if record:
                rec_x[s, i] = nx
                rec_y[s, i] = ny
                rec_L[s, i] = L[i]
                rec_c[s, i] = clock[i]
            if deep_log < 0.0:
                if in_deep[i] == 0:
                    if nx <= deep_log:
                        if entry_counts[i] < cap:
                            entries[i, entry_counts[i]] = ny % TWO_PI
                            entry_counts[i] += 1
                        in_deep[i] = 1
                else:
                    if nx >= -1e-12:
                        in_deep[i] = 0
            if stop_at_clock and clock[i] >= clock_targets[i]:
                done[i] = True


@njit(cache=True)
def bessel_steps(r, L, gauss, sqrt_dt, dt):
    """Euler steps for the radial part: the 2-d Bessel SDE
    dY = dW + dt/(2Y) - dL, reflected at 1.

    The drift is regularized at the sqrt(dt) scale and the chain is mirrored
    at 0 (the continuous process never reaches 0, but the Euler chain can
    overshoot; an unregularized 1/Y kick would corrupt the local time).
    """
    nsteps = gauss.shape[0]
    n = r.shape[0]
    for s in range(nsteps):
        for i in range(n):
            v = r[i] + sqrt_dt * gauss[s, i] + 0.5 * dt / max(r[i], sqrt_dt)
            if v < 0.0:
                v = -v
            if v > 1.0:
                L[i] += v - 1.0
                v = 1.0
            r[i] = v


@njit(cache=True)
def excursion_acceptance(alpha, delta, eps_dep, dt, trials, seed, max_steps,
                         endpoint_angles, record_endpoints, stop_at_deep):
    """Count trials (Brownian starts at distance delta from the boundary,
    killed there with a Brownian-bridge correction) that reach depth eps_dep.

    When record_endpoints is true the trial is run to its death and the
    terminal boundary angle is stored, for comparison against the exact
    harmonic-measure density of the start point; otherwise the trial stops
    as soon as the acceptance decision is made (stop_at_deep).
    """
    np.random.seed(seed)
    sdt = np.sqrt(dt)
    r_deep2 = (1.0 - eps_dep) ** 2
    acc = 0
    for t in range(trials):
        px = (1.0 - delta) * np.cos(alpha)
        py = (1.0 - delta) * np.sin(alpha)
        d1 = delta
        deep = False
        for _ in range(max_steps):
            nx = px + sdt * np.random.standard_normal()
            ny = py + sdt * np.random.standard_normal()
            r2 = nx * nx + ny * ny
            if r2 >= 1.0:
                if record_endpoints:
                    endpoint_angles[t] = np.arctan2(ny, nx)
                break
            d2 = 1.0 - np.sqrt(r2)
            if np.random.random() < np.exp(-2.0 * d1 * d2 / dt):
                if record_endpoints:
                    endpoint_angles[t] = np.arctan2(0.5 * (py + ny), 0.5 * (px + nx))
                break
            if not deep and r2 <= r_deep2:
                deep = True
                if stop_at_deep:
                    break
            px, py, d1 = nx, ny, d2
        if deep:
            acc += 1
    return acc


@njit(cache=True)
def sample_excursion_path(alpha, delta, eps_dep, dt_fine, dt_coarse,
                          switch_depth, rec_dt, seed, max_steps,
                          buf_x, buf_y):
    """Sample one Brownian excursion conditioned to reach depth eps_dep.

    Rejection sampling from an interior start at distance delta; a fine step
    is used in the thin layer near the root, a coarse one once the path is
    at depth switch_depth.  Points are recorded every rec_dt time units into
    buf_x/buf_y.  Returns (n_points, lifetime, max_depth, end_angle, trials).
    """
    np.random.seed(seed)
    cap = buf_x.shape[0]
    trials = 0
    while True:
        trials += 1
        px = (1.0 - delta) * np.cos(alpha)
        py = (1.0 - delta) * np.sin(alpha)
        t = 0.0
        t_rec = 0.0
        n_pts = 0
        max_depth = delta
        accepted = False
        alive = True
        end_angle = alpha
        for _ in range(max_steps):
            depth = 1.0 - np.sqrt(px * px + py * py)
            dt = dt_fine if depth < switch_depth else dt_coarse
            sdt = np.sqrt(dt)
            nx = px + sdt * np.random.standard_normal()
            ny = py + sdt * np.random.standard_normal()
            r2 = nx * nx + ny * ny
            if r2 >= 1.0:
                end_angle = np.arctan2(ny, nx)
                alive = False
            else:
                d2 = 1.0 - np.sqrt(r2)
                if np.random.random() < np.exp(-2.0 * depth * d2 / dt):
                    end_angle = np.arctan2(0.5 * (py + ny), 0.5 * (px + nx))
                    alive = False
            t += dt
            if not alive:
                break
            px, py = nx, ny
            d = 1.0 - np.sqrt(r2)
            if d > max_depth:
                max_depth = d
                if d >= eps_dep:
                    accepted = True
            t_rec += dt
            if t_rec >= rec_dt and n_pts < cap:
                buf_x[n_pts] = px
                buf_y[n_pts] = py
                n_pts += 1
                t_rec = 0.0
        if accepted and not alive:
            return n_pts, t, max_depth, end_angle, trials


@njit(cache=True)
def half_plane_adaptive(x, y, L, clock, gauss, tan_grid, dt_disk,
                        deep_log, in_deep, entries, entry_counts,
                        clock_targets, done, n_blocks_used, stop_at_entries):
    """Half-plane scheme with state-adapted steps of equal disk time.

    Away from the boundary the clock rate exp(2 Re z) collapses, so fixed
    strip steps stall; here each step takes strip time about
    dt_disk * exp(-2x), capped so the step stays small against the distance
    to the boundary.  Replicas stop when their clock reaches its target.
    Returns the number of replicas still running.
    """
    nsteps = gauss.shape[0]
    n = x.shape[0]
    ecap = entries.shape[1]
    active = 0
    for s in range(nsteps):
        active = 0
        for i in range(n):
            if done[i]:
                continue
            active += 1
            xi = x[i]
            w_old = np.exp(2.0 * xi)
            # step of equal disk time dt_disk, capped so that the strip step
            # stays below a quarter of the distance to the boundary
            sig_cap2 = xi * xi / 16.0
            dt_cap = dt_disk if dt_disk > sig_cap2 else sig_cap2
            if xi < -25.0:
                dt = dt_cap
            else:
                dtc = dt_disk * np.exp(-2.0 * xi)
                dt = dtc if dtc < dt_cap else dt_cap
            sdt = np.sqrt(dt)
            nx = x[i] + sdt * gauss[s, i, 0]
            ny = y[i] + sdt * gauss[s, i, 1]
            if nx > 0.0:
                ell = nx
                tn = _interp_circle(tan_grid, ny)
                nx = 0.0
                ny += ell * tn
                L[i] += ell
            clock[i] += 0.5 * (w_old + np.exp(2.0 * nx)) * dt
            x[i] = nx
            y[i] = ny
            if deep_log < 0.0:
                if in_deep[i] == 0:
                    if nx <= deep_log:
                        if entry_counts[i] < ecap:
                            entries[i, entry_counts[i]] = ny % TWO_PI
                            entry_counts[i] += 1
                            if stop_at_entries > 0 and entry_counts[i] >= stop_at_entries:
                                done[i] = True
                        in_deep[i] = 1
                else:
                    if nx >= -1e-12:
                        in_deep[i] = 0
            if clock_targets[i] > 0.0 and clock[i] >= clock_targets[i]:
                done[i] = True
    n_blocks_used[0] += nsteps
    return active


@njit(cache=True)
def minimax_alignment(ax, ay, at, bx, by, bt):
    """Minimal sup-distance over monotone alignments of two point chains in
    (value, time) space: the dynamic program behind the approximate M1 metric."""
    n = ax.shape[0]
    m = bx.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    for j in range(m):
        dx = ax[0] - bx[j]
        dy = ay[0] - by[j]
        dt_ = at[0] - bt[j]
        c = np.sqrt(dx * dx + dy * dy + dt_ * dt_)
        prev[j] = c if j == 0 else max(c, prev[j - 1])
    for i in range(1, n):
        for j in range(m):
            dx = ax[i] - bx[j]
            dy = ay[i] - by[j]
            dt_ = at[i] - bt[j]
            c = np.sqrt(dx * dx + dy * dy + dt_ * dt_)
            best = prev[j]
            if j > 0:
                if prev[j - 1] < best:
                    best = prev[j - 1]
                if cur[j - 1] < best:
                    best = cur[j - 1]
            cur[j] = max(c, best)
        for j in range(m):
            prev[j] = cur[j]
    return prev[m - 1]
