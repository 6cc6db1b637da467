# Spectral factorization of the Daubechies polynomial for db10 (independent check of the tap table).
import mpmath as mp, pywt
mp.mp.dps = 50
N = 10
# P(y) = sum_k C(N-1+k,k) y^k, y = (1 - cos w)/2 = -(z - 2 + 1/z)/4
# Build Q(z) = z^{N-1} P(y(z)) as polynomial in z (degree 2N-2)
from mpmath import binomial
# y(z)*z = -(z^2 - 2z + 1)/4
def polymul(a,b):
    r=[mp.mpf(0)]*(len(a)+len(b)-1)
    for i,x in enumerate(a):
        for j,y in enumerate(b): r[i+j]+=x*y
    return r
base=[mp.mpf(-1)/4, mp.mpf(2)/4, mp.mpf(-1)/4]  # coefficients ascending in z: -(1 -2z + z^2)/4
Q=[mp.mpf(0)]*(2*N-1)
for k in range(N):
    term=[mp.mpf(1)]
    for _ in range(k): term=polymul(term,base)
    # multiply by z^{N-1-k}
    term=[mp.mpf(0)]*(N-1-k)+term
    term=term+[mp.mpf(0)]*(2*N-1-len(term))
    for i in range(2*N-1): Q[i]+=binomial(N-1+k,k)*term[i]
roots=mp.polyroots(list(reversed(Q)),maxsteps=500,extraprec=200)
inside=[r for r in roots if abs(r)<1]
h=[mp.mpc(1)]
for r in inside: h=polymul(h,[-r,mp.mpc(1)])
for _ in range(N): h=polymul(h,[mp.mpc(1),mp.mpc(1)])
h=[x.real for x in h]
s=sum(h); h=[x*mp.sqrt(2)/s for x in h]
ref=list(pywt.Wavelet('db10').dec_lo)
# pywt dec_lo is time-reversed rec_lo
for cand in (h, list(reversed(h))):
    print(max(abs(float(a)-b) for a,b in zip(cand,ref)))
for x in reversed(h): print(mp.nstr(x,20))
