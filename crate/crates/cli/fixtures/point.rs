structure point over pos
points x
