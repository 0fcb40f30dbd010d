structure short over met
points p q
edge eq[3/4](p,q)
