"""Plain-Python slot simulator used as an oracle for the compiled engine.

It is deliberately written from scratch with deques and dicts. Draw order per
slot: links SR, RS, RH, HR; servers R, H; routing; arrival.
"""

from collections import deque

# stage indices: SS->RS, R compute, RS->HS, H compute, HS->RS, RS->SS
SR, CR, RH, CH, HR, RS = range(6)
_DRAW = {SR: 0, CR: 4, RH: 2, CH: 5, HR: 3, RS: 1}


def simulate(draws, probs, rho, a, hs_first=False):
    """Return {task: (gen, path, done)} after running every row of ``draws``.

    ``hs_first`` flips the order in which simultaneous arrivals at the RS->SS
    buffer are queued.
    """
    queues = [deque() for _ in range(6)]
    tasks = {}
    next_id = 0
    for t, u in enumerate(draws):
        moving = {}
        for s in range(6):
            if queues[s] and u[_DRAW[s]] < probs[s]:
                moving[s] = queues[s].popleft()
        if SR in moving:
            i = moving[SR]
            if u[6] < rho:
                tasks[i][1] = "RS"
                queues[CR].append(i)
            else:
                tasks[i][1] = "HS"
                queues[RH].append(i)
        if RH in moving:
            queues[CH].append(moving[RH])
        if CH in moving:
            queues[HR].append(moving[CH])
        back = [moving[s] for s in ((HR, CR) if hs_first else (CR, HR)) if s in moving]
        queues[RS].extend(back)
        if RS in moving:
            tasks[moving[RS]][2] = t
        if u[7] < a:
            tasks[next_id] = [t, None, None]
            queues[SR].append(next_id)
            next_id += 1
    return tasks
