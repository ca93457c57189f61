# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: the sparse feasibility DP, BFD, the bounded evicting
caches and the adversary/algorithm minimax over sorted bin configurations.

The search mutates one working configuration in place and undoes each move,
instead of allocating a new immutable configuration per node.
"""
from libc.stdint cimport uint64_t, uint32_t, uint16_t
from libc.stdlib cimport calloc, malloc, free
from libc.string cimport memcpy, memcmp

from math import comb

cdef enum:
    MAXM = 8
    ADV = 0
    ALG = 1
    MISS = 2

cdef uint64_t LOW_BIT = 1
cdef uint32_t COUNT_CAP = 0xFFFFFFFF


# ---------------------------------------------------------------------------
# Bounded chained cache
# ---------------------------------------------------------------------------

cdef struct Cache:
    uint64_t* keys        # fingerprint with bit 0 replaced by the payload
    uint32_t* counts      # 0 marks an empty slot
    uint16_t* sigs        # paranoid mode: full canonical signature per slot
    int sig_len
    uint64_t mask
    int chain
    unsigned long long hits
    unsigned long long misses
    unsigned long long evictions
    unsigned long long collisions


cdef int cache_init(Cache* c, int bits, int chain, int sig_len) except -1:
    cdef size_t slots = (<size_t>1 << bits) * chain
    c.mask = (<uint64_t>1 << bits) - 1
    c.chain = chain
    c.sig_len = sig_len
    c.hits = c.misses = c.evictions = c.collisions = 0
    c.keys = <uint64_t*>calloc(slots, sizeof(uint64_t))
    c.counts = <uint32_t*>calloc(slots, sizeof(uint32_t))
    c.sigs = NULL
    if sig_len > 0:
        c.sigs = <uint16_t*>calloc(slots * sig_len, sizeof(uint16_t))
    if c.keys == NULL or c.counts == NULL or (sig_len > 0 and c.sigs == NULL):
        cache_free(c)
        raise MemoryError(f"cannot allocate a cache with 2^{bits} x {chain} slots")
    return 0


cdef void cache_free(Cache* c):
    free(c.keys)
    free(c.counts)
    free(c.sigs)
    c.keys = NULL
    c.counts = NULL
    c.sigs = NULL


cdef inline int cache_lookup(Cache* c, uint64_t key, uint16_t* sig) noexcept nogil:
    cdef size_t base = <size_t>(key & c.mask) * c.chain
    cdef size_t s
    cdef uint64_t want = key | LOW_BIT
    for s in range(base, base + c.chain):
        if c.counts[s] != 0 and (c.keys[s] | LOW_BIT) == want:
            if c.sig_len > 0 and memcmp(&c.sigs[s * c.sig_len], sig, c.sig_len * sizeof(uint16_t)) != 0:
                c.collisions += 1
                continue
            if c.counts[s] < COUNT_CAP:
                c.counts[s] += 1
            c.hits += 1
            return <int>(c.keys[s] & LOW_BIT)
    c.misses += 1
    return MISS


cdef inline void cache_store(Cache* c, uint64_t key, int payload, uint16_t* sig) noexcept nogil:
    cdef size_t base = <size_t>(key & c.mask) * c.chain
    cdef size_t s, victim = base
    cdef uint64_t want = key | LOW_BIT
    cdef uint32_t least = COUNT_CAP
    cdef int found_empty = 0
    for s in range(base, base + c.chain):
        if c.counts[s] != 0 and (c.keys[s] | LOW_BIT) == want:
            if c.sig_len == 0 or memcmp(&c.sigs[s * c.sig_len], sig, c.sig_len * sizeof(uint16_t)) == 0:
                c.keys[s] = (key & ~LOW_BIT) | <uint64_t>payload
                return
    for s in range(base, base + c.chain):
        if c.counts[s] == 0:
            victim = s
            found_empty = 1
            break
        if c.counts[s] < least:
            least = c.counts[s]
            victim = s
    if not found_empty:
        c.evictions += 1
    c.keys[victim] = (key & ~LOW_BIT) | <uint64_t>payload
    c.counts[victim] = 1
    if c.sig_len > 0:
        memcpy(&c.sigs[victim * c.sig_len], sig, c.sig_len * sizeof(uint16_t))


cdef class KernelCache:
    """Python handle on the compiled cache (used by tests and benchmarks)."""

    cdef Cache c
    cdef readonly int bits, chain_length

    def __cinit__(self, int bits, int chain_length=4):
        if bits < 1 or bits > 34:
            raise ValueError(f"cache bits must be in 1..34, got {bits}")
        if chain_length < 1:
            raise ValueError("chain length must be positive")
        self.bits = bits
        self.chain_length = chain_length
        cache_init(&self.c, bits, chain_length, 0)

    def __dealloc__(self):
        cache_free(&self.c)

    def lookup(self, key):
        cdef int r = cache_lookup(&self.c, <uint64_t>key, NULL)
        return None if r == MISS else bool(r)

    def store(self, key, payload):
        cache_store(&self.c, <uint64_t>key, 1 if payload else 0, NULL)

    def bucket_of(self, key):
        return int(<uint64_t>key & self.c.mask)

    @property
    def evictions(self):
        return self.c.evictions

    @property
    def hits(self):
        return self.c.hits

    @property
    def misses(self):
        return self.c.misses


# ---------------------------------------------------------------------------
# Feasibility: sparse queue DP and BFD
# ---------------------------------------------------------------------------

cdef class FeasibilityKernel:
    """Sparse DP over sorted load tuples with a generation-stamped marker array."""

    cdef readonly int bins, opt
    cdef uint32_t* marks
    cdef uint32_t generation
    cdef size_t cells
    cdef int* q1
    cdef int* q2
    cdef size_t qcap
    cdef size_t powers[MAXM]
    cdef public bint early_exit
    cdef public unsigned long long calls

    def __cinit__(self, int bins, int opt, bint early_exit=False):
        cdef int k
        if bins < 1 or bins > MAXM:
            raise ValueError(f"bins must be in 1..{MAXM}")
        self.bins = bins
        self.opt = opt
        self.early_exit = early_exit
        self.cells = (<size_t>opt + 1) ** bins
        if self.cells > (<size_t>1 << 28):
            raise ValueError(f"(T+1)^m = {self.cells} marker cells is too large")
        self.powers[0] = 1
        for k in range(1, bins):
            self.powers[k] = self.powers[k - 1] * (opt + 1)
        self.qcap = comb(opt + bins, bins) + 1
        self.marks = <uint32_t*>calloc(self.cells, sizeof(uint32_t))
        self.q1 = <int*>malloc(self.qcap * bins * sizeof(int))
        self.q2 = <int*>malloc(self.qcap * bins * sizeof(int))
        if self.marks == NULL or self.q1 == NULL or self.q2 == NULL:
            raise MemoryError()
        self.generation = 0
        self.calls = 0

    def __dealloc__(self):
        free(self.marks)
        free(self.q1)
        free(self.q2)

    cdef inline uint32_t next_generation(self) noexcept nogil:
        cdef size_t i
        self.generation += 1
        if self.generation == 0:
            for i in range(self.cells):
                self.marks[i] = 0
            self.generation = 1
        return self.generation

    cdef int test(self, int* freq, int extra) noexcept nogil:
        """1 iff freq (plus one item of size ``extra`` if > 0) packs into m bins of T."""
        cdef int m = self.bins, T = self.opt
        cdef int size, cnt, c, k, j, tmp, total = 0, remaining
        cdef size_t n1, n2, t, code
        cdef int* src
        cdef int* dst
        cdef int* tup
        cdef int* new
        cdef uint32_t gen
        self.calls += 1
        for size in range(1, T + 1):
            total += size * freq[size]
        if extra > 0:
            total += extra
        if total > m * T:
            return 0
        remaining = total
        src = self.q1
        dst = self.q2
        for k in range(m):
            src[k] = 0
        n1 = 1
        for size in range(T, 0, -1):
            cnt = freq[size]
            if size == extra:
                cnt += 1
            for c in range(cnt):
                remaining -= size
                gen = self.next_generation()
                n2 = 0
                for t in range(n1):
                    tup = &src[t * m]
                    for k in range(m):
                        if k > 0 and tup[k] == tup[k - 1]:
                            continue
                        if tup[k] + size > T:
                            continue
                        new = &dst[n2 * m]
                        memcpy(new, tup, m * sizeof(int))
                        new[k] += size
                        j = k
                        while j > 0 and new[j] > new[j - 1]:
                            tmp = new[j]
                            new[j] = new[j - 1]
                            new[j - 1] = tmp
                            j -= 1
                        code = 0
                        for j in range(m):
                            code += <size_t>new[j] * self.powers[j]
                        if self.marks[code] != gen:
                            self.marks[code] = gen
                            if self.early_exit and T - new[m - 1] >= remaining:
                                return 1
                            n2 += 1
                if n2 == 0:
                    return 0
                tup = src
                src = dst
                dst = tup
                n1 = n2
        return 1

    cdef int bfd(self, int* freq) noexcept nogil:
        cdef int m = self.bins, T = self.opt
        cdef int loads[MAXM]
        cdef int size, c, b, best, best_slack, slack, least
        for b in range(m):
            loads[b] = 0
        for size in range(T, 0, -1):
            for c in range(freq[size]):
                best = -1
                best_slack = T + 1
                for b in range(m):
                    slack = T - loads[b] - size
                    if slack >= 0 and slack < best_slack:
                        best = b
                        best_slack = slack
                if best < 0:
                    return 0
                loads[best] += size
        least = loads[0]
        for b in range(1, m):
            if loads[b] < least:
                least = loads[b]
        return T - least

    def test_feasible(self, freq):
        """Python entry point; ``freq`` is indexed by size with freq[0] ignored."""
        cdef int buf[512]
        cdef int i, T = self.opt
        if T >= 511:
            raise ValueError("T too large")
        if len(freq) > T + 1 and any(freq[T + 1:]):
            return False
        for i in range(T + 1):
            buf[i] = freq[i] if i < len(freq) else 0
        buf[0] = 0
        return bool(self.test(buf, 0))

    def bfd_max_slack(self, freq):
        cdef int buf[512]
        cdef int i, T = self.opt
        for i in range(T + 1):
            buf[i] = freq[i] if i < len(freq) else 0
        buf[0] = 0
        return self.bfd(buf)

    def max_feasible_item(self, freq):
        """Largest sendable item for the multiset ``freq`` (0 if none); no caching."""
        cdef int buf[512]
        cdef int i, T = self.opt, total = 0, ub, lb
        if T >= 511:
            raise ValueError("T too large")
        for i in range(T + 1):
            buf[i] = freq[i] if i < len(freq) else 0
            total += i * buf[i]
        ub = self.bins * T - total
        if ub > T:
            ub = T
        if ub <= 0:
            return 0
        lb = self.bfd(buf)
        if lb >= ub:
            return ub
        for i in range(ub, lb, -1):
            if self.test(buf, i):
                return i
        return lb


# ---------------------------------------------------------------------------
# Minimax search
# ---------------------------------------------------------------------------

cdef class Solver:
    """Adversary/algorithm search for Γ(S, T) on m bins.

    ``item_values`` and ``load_values`` are the Zobrist rows produced by
    :func:`binstretch.hashing.make_table`, so fingerprints agree with the
    Python layer.
    """

    cdef readonly int m, S, T, alpha
    cdef readonly bint gs_on, caching, paranoid
    cdef public bint finish_on
    cdef public unsigned long long finishes
    cdef int loads[MAXM]
    cdef int* freq
    cdef int total
    cdef uint64_t hitems, hloads
    cdef uint64_t* zitem
    cdef uint64_t* zload
    cdef int fstride, lstride
    cdef Cache ccache, tcache
    cdef FeasibilityKernel dp
    cdef uint16_t* sigbuf
    cdef int sig_len
    cdef unsigned long long* gap_hist
    cdef int depth
    cdef public unsigned long long nodes, alg_nodes, test_calls, test_cache_hits, gs_prunes
    cdef public int max_depth
    cdef dict winning

    def __cinit__(self, int m, int S, int T, item_values, load_values, bint gs_pruning=True,
                  bint caching=True, int cache_bits=25, int chain_length=4,
                  int test_cache_bits=23, bint paranoid=False, bint finish_rule=True):
        cdef int i, f, p, l
        if m < 2 or m > MAXM:
            raise ValueError(f"bins must be in 2..{MAXM}")
        if S <= T or T < 1:
            raise ValueError("need S > T >= 1")
        self.m = m
        self.S = S
        self.T = T
        self.alpha = (S - 1) - T
        # generalized good situations need alpha >= T/3 and are only defined for three bins
        self.gs_on = gs_pruning and m == 3 and 3 * self.alpha >= T
        self.caching = caching
        self.paranoid = paranoid
        self.finish_on = finish_rule
        self.fstride = m * T + 1
        self.lstride = S + 1
        self.freq = <int*>calloc(T + 1, sizeof(int))
        self.zitem = <uint64_t*>malloc((T + 1) * self.fstride * sizeof(uint64_t))
        self.zload = <uint64_t*>malloc(m * self.lstride * sizeof(uint64_t))
        self.gap_hist = <unsigned long long*>calloc(T + 2, sizeof(unsigned long long))
        self.sig_len = m + T if paranoid else 0
        self.sigbuf = <uint16_t*>calloc(m + T + 1, sizeof(uint16_t))
        if (self.freq == NULL or self.zitem == NULL or self.zload == NULL
                or self.gap_hist == NULL or self.sigbuf == NULL):
            raise MemoryError()
        for i in range(T + 1):
            for f in range(self.fstride):
                self.zitem[i * self.fstride + f] = item_values[i][f] if i > 0 else 0
        for p in range(m):
            for l in range(self.lstride):
                self.zload[p * self.lstride + l] = load_values[p][l]
        if caching:
            cache_init(&self.ccache, cache_bits, chain_length, self.sig_len)
            cache_init(&self.tcache, test_cache_bits, chain_length, T if paranoid else 0)
        self.dp = FeasibilityKernel(m, T)
        self.winning = {}
        self.reset()

    def __dealloc__(self):
        free(self.freq)
        free(self.zitem)
        free(self.zload)
        free(self.gap_hist)
        free(self.sigbuf)
        if self.caching:
            cache_free(&self.ccache)
            cache_free(&self.tcache)

    cpdef reset(self):
        cdef int i
        for i in range(self.m):
            self.loads[i] = 0
        for i in range(self.T + 1):
            self.freq[i] = 0
        self.total = 0
        self.hitems = 0
        for i in range(1, self.T + 1):
            self.hitems ^= self.zitem[i * self.fstride]
        self.rehash_loads()
        self.depth = 0

    cdef inline void rehash_loads(self) noexcept nogil:
        cdef int p
        cdef uint64_t h = 0
        for p in range(self.m):
            h ^= self.zload[p * self.lstride + self.loads[p]]
        self.hloads = h

    cdef inline void add_item(self, int size) noexcept nogil:
        cdef int f = self.freq[size]
        self.hitems ^= self.zitem[size * self.fstride + f] ^ self.zitem[size * self.fstride + f + 1]
        self.freq[size] = f + 1
        self.total += size

    cdef inline void remove_item(self, int size) noexcept nogil:
        cdef int f = self.freq[size]
        self.hitems ^= self.zitem[size * self.fstride + f] ^ self.zitem[size * self.fstride + f - 1]
        self.freq[size] = f - 1
        self.total -= size

    cdef inline void place(self, int pos, int size) noexcept nogil:
        cdef int j = pos, tmp
        self.loads[pos] += size
        while j > 0 and self.loads[j] > self.loads[j - 1]:
            tmp = self.loads[j]
            self.loads[j] = self.loads[j - 1]
            self.loads[j - 1] = tmp
            j -= 1
        self.rehash_loads()

    cdef uint16_t* signature(self, int with_loads) noexcept nogil:
        cdef int i, off = 0
        if with_loads:
            for i in range(self.m):
                self.sigbuf[i] = <uint16_t>self.loads[i]
            off = self.m
        for i in range(1, self.T + 1):
            self.sigbuf[off + i - 1] = <uint16_t>self.freq[i]
        return self.sigbuf

    # --- feasibility with the multiset-keyed cache ------------------------

    cdef int test_with(self, int size) noexcept nogil:
        cdef int f = self.freq[size], r
        cdef uint64_t key
        cdef uint16_t* sig = NULL
        if not self.caching:
            self.test_calls += 1
            return self.dp.test(self.freq, size)
        key = self.hitems ^ self.zitem[size * self.fstride + f] ^ self.zitem[size * self.fstride + f + 1]
        if self.paranoid:
            self.freq[size] += 1
            sig = self.signature(0)
            self.freq[size] -= 1
        r = cache_lookup(&self.tcache, key, sig)
        if r != MISS:
            self.test_cache_hits += 1
            return r
        self.test_calls += 1
        r = self.dp.test(self.freq, size)
        cache_store(&self.tcache, key, r, sig)
        return r

    cdef int max_feasible(self) noexcept nogil:
        cdef int ub = self.m * self.T - self.total, lb, i
        if ub > self.T:
            ub = self.T
        if ub <= 0:
            return 0
        lb = self.dp.bfd(self.freq)
        if lb >= ub:
            self.gap_hist[0] += 1
            return ub
        self.gap_hist[ub - lb] += 1
        for i in range(ub, lb, -1):
            if self.test_with(i):
                return i
        return lb

    # --- good situations 1-5 (three bins, sorted loads) -------------------

    cdef int gs_detect(self) noexcept nogil:
        cdef int T = self.T, Sp = self.S - 1, al = self.alpha
        cdef int l[3]
        cdef int x, y, z, r, i, top
        l[0] = self.loads[0]
        l[1] = self.loads[1]
        l[2] = self.loads[2]
        # GS1: the two fullest bins
        if l[0] + l[1] >= 2 * T - al:
            return 1
        # GS2: some load in [T - 2 alpha, alpha]
        for r in range(3):
            if T - 2 * al <= l[r] <= al:
                return 2
        # GS3: one bin at least 3/2 (T - alpha), the others (i) one >= alpha,
        # (ii) summing to >= S', or (iii) one below T - 2 alpha
        for r in range(3):
            x = l[r]
            y = l[(r + 1) % 3]
            z = l[(r + 2) % 3]
            if 2 * x >= 3 * (T - al) and x <= Sp:
                if y + z >= Sp or y < T - 2 * al or z < T - 2 * al:
                    return 3
        # GS4: 2 (x + y) >= 3 (T - alpha) + z with y, z < T - 2 alpha
        for r in range(3):
            x = l[r]
            y = l[(r + 1) % 3]
            z = l[(r + 2) % 3]
            if y < T - 2 * al and z < T - 2 * al and 2 * (x + y) >= 3 * (T - al) + z:
                return 4
        # GS5: an empty bin, a bin in [(3T - 7 alpha)/2, alpha], and a bin
        # holding an item of size in (alpha, its load]
        if l[2] == 0:
            for r in range(2):
                x = l[r]
                y = l[1 - r]
                if 2 * y >= 3 * T - 7 * al and y <= al:
                    top = x if x < T else T
                    for i in range(al + 1, top + 1):
                        if self.freq[i] > 0:
                            return 5
        return 0

    # --- the game ---------------------------------------------------------

    cdef int eval_adv(self) noexcept nogil:
        cdef int y, i, result = ALG, r
        cdef uint64_t key
        cdef uint16_t* sig = NULL
        self.nodes += 1
        if self.depth > self.max_depth:
            self.max_depth = self.depth
        if self.gs_on and self.gs_detect():
            self.gs_prunes += 1
            return ALG
        if self.finish_on and self.total - self.loads[self.m - 1] >= self.m * self.T - (self.S - 1):
            self.finishes += 1
            return ALG
        key = self.hitems ^ self.hloads
        if self.caching:
            if self.paranoid:
                sig = self.signature(1)
            r = cache_lookup(&self.ccache, key, sig)
            if r != MISS:
                return r
        y = self.max_feasible()
        for i in range(y, 0, -1):
            if self.eval_alg(i) == ADV:
                result = ADV
                break
        if self.caching:
            if self.paranoid:
                sig = self.signature(1)
            cache_store(&self.ccache, key, result, sig)
        return result

    cdef int eval_alg(self, int size) noexcept nogil:
        cdef int saved[MAXM]
        cdef uint64_t saved_hl = self.hloads
        cdef int p, result = ADV
        self.alg_nodes += 1
        memcpy(saved, self.loads, self.m * sizeof(int))
        self.add_item(size)
        self.depth += 1
        for p in range(self.m):
            if p > 0 and saved[p] == saved[p - 1]:
                continue
            if saved[p] + size >= self.S:
                continue
            self.place(p, size)
            if self.eval_adv() == ALG:
                result = ALG
            memcpy(self.loads, saved, self.m * sizeof(int))
            self.hloads = saved_hl
            if result == ALG:
                break
        self.depth -= 1
        self.remove_item(size)
        return result

    # --- Python entry points ----------------------------------------------

    def set_state(self, loads, freq):
        """Load an arbitrary configuration (sorted loads, frequency table)."""
        cdef int i
        ls = sorted(loads, reverse=True)
        if len(ls) != self.m:
            raise ValueError(f"expected {self.m} loads")
        if any(l < 0 or l >= self.S for l in ls):
            raise ValueError("loads must lie in 0..S-1")
        self.reset()
        for i in range(self.m):
            self.loads[i] = ls[i]
        for i in range(1, self.T + 1):
            f = freq[i] if i < len(freq) else 0
            while f > 0:
                self.add_item(i)
                f -= 1
        if self.total != sum(ls):
            raise ValueError("loads do not sum to the multiset total")
        self.rehash_loads()

    def solve(self):
        """Outcome at the root: 0 adversary wins, 1 algorithm wins."""
        self.reset()
        return self.eval_adv()

    def evaluate(self):
        """evalAdv at the current state."""
        return self.eval_adv()

    def evaluate_item(self, int size):
        """evalAlg at the current state for one incoming item."""
        if size < 1 or size > self.T:
            raise ValueError("item size out of range")
        return self.eval_alg(size)

    def max_feasible_item(self):
        return self.max_feasible()

    def good_situation(self):
        if self.m != 3:
            return 0
        return self.gs_detect()

    @property
    def fingerprint(self):
        return self.hitems ^ self.hloads

    @property
    def items_fingerprint(self):
        return self.hitems

    @property
    def state(self):
        return (tuple(self.loads[i] for i in range(self.m)),
                tuple(self.freq[i] for i in range(self.T + 1)))

    def build_tree(self):
        """Re-expand the adversary's winning strategy from the current state.

        Returns nested ``(loads, item, [(resulting_loads, child), ...])``
        tuples; an empty response list means the item fits nowhere. Raises
        if the current state is not an adversary win.
        """
        if self.eval_adv() != ADV:
            raise ValueError("state is not won by the adversary")
        return self._build()

    cdef object _build(self):
        cdef int saved[MAXM]
        cdef uint64_t saved_hl = self.hloads
        cdef uint64_t key = self.hitems ^ self.hloads
        cdef int y, i, p, chosen = 0
        here = tuple(self.loads[p] for p in range(self.m))
        cached = self.winning.get((key, here))
        if cached is not None:
            chosen = cached
        else:
            y = self.max_feasible()
            for i in range(y, 0, -1):
                if self.eval_alg(i) == ADV:
                    chosen = i
                    break
            if chosen == 0:
                raise RuntimeError(f"no winning item at loads {here}; inconsistent cache")
            self.winning[(key, here)] = chosen
        memcpy(saved, self.loads, self.m * sizeof(int))
        self.add_item(chosen)
        responses = []
        for p in range(self.m):
            if p > 0 and saved[p] == saved[p - 1]:
                continue
            if saved[p] + chosen >= self.S:
                continue
            self.place(p, chosen)
            after = tuple(self.loads[i] for i in range(self.m))
            responses.append((after, self._build()))
            memcpy(self.loads, saved, self.m * sizeof(int))
            self.hloads = saved_hl
        self.remove_item(chosen)
        return (here, chosen, responses)

    def stats(self):
        out = {
            "nodes": self.nodes,
            "alg_nodes": self.alg_nodes,
            "test_calls": self.test_calls,
            "test_cache_hits": self.test_cache_hits,
            "gs_prunes": self.gs_prunes,
            "finishes": self.finishes,
            "max_depth": self.max_depth,
            "gs_active": bool(self.gs_on),
        }
        if self.caching:
            out.update({
                "cache_hits": self.ccache.hits,
                "cache_misses": self.ccache.misses,
                "cache_evictions": self.ccache.evictions,
                "cache_collisions": self.ccache.collisions,
                "test_cache_evictions": self.tcache.evictions,
            })
        out["ub_lb_gap"] = {g: self.gap_hist[g] for g in range(self.T + 1) if self.gap_hist[g]}
        return out
